"""Single source of truth for geometric thresholds, tolerances, and defaults.

All modules import from here instead of hardcoding. Lengths in feet unless the
name says pixels (ـPX); angles in radians unless the name says degrees (_DEG).
"""

import math

# Coordinate precision at serialization
COORD_DECIMALS = 2          # 0.01 ft
ANGLE_DECIMALS = 6          # 1e-6 rad

# Element defaults (vertical dimensions are configurable conventions)
DEFAULT_WALL_THICKNESS = 0.5
DEFAULT_WALL_HEIGHT = 10.0
DEFAULT_DOOR_HEIGHT = 7.0
DEFAULT_WINDOW_HEIGHT = 4.0
DEFAULT_WINDOW_SILL = 3.0

DOOR_WIDTH_DEFAULT = 3.0
DOOR_WIDTH_RANGE = (2.5, 3.5)
WINDOW_WIDTH_DEFAULT = 4.5
WINDOW_WIDTH_RANGE = (4.0, 5.0)

# Opening placement rules
OPENING_END_MARGIN = 0.75   # min distance from wall ends
OPENING_SPACING = 0.50      # min gap between openings on one wall

# Connectivity / snapping
CONNECT_TOL = 0.05          # endpoint coincidence tolerance
SNAP_ENDPOINT_GAP = 1.00    # extraction: weld endpoint pairs closer than this
SNAP_TJUNCTION_GAP = 0.80   # extraction: project endpoint onto a nearby wall interior

# Segment merging
MERGE_ANGLE_MAX_DEG = 1.0
MERGE_ENDPOINT_GAP = 3.0
MERGE_PERP_OFFSET = 0.50
DOUBLE_STROKE_OVERLAP = 0.60
DOUBLE_STROKE_GAP_MAX = 1.5  # parallel strokes further apart are separate walls

# Stub retention
STUB_MIN_LENGTH = 1.25
STUB_REVIEW_LENGTH = 4.0     # walls shorter than this must justify themselves
STUB_MIN_TURN_DEG = 12.0
NEW_CLUSTER_DEVIATION_DEG = 5.0

# Arc fitting
ARC_SAGITTA_TOL = 0.10       # max sample-to-circle residual for an accepted arc
ARC_MIN_SAGITTA = 0.02       # flatter runs are lines
ARC_SAMPLE_SAGITTA = 0.02    # chordal sampling tolerance for polygons/meshes
COLLINEAR_AREA_EPS = 1e-6    # twice-triangle-area below this is collinear

# Sliver rooms
SLIVER_WIDTH = 2.0           # min caliper width below which a face is merged

# Raster perception
HOUGH_ANGLE_BIN_DEG = 1.0
HOUGH_RHO_BIN_PX = 2.0
HOUGH_SUPPORT_MIN = 20
HOUGH_VOTE_CAP = 8000        # probabilistic voting subsample size
RANSAC_ITERS = 200
RANSAC_BAND_PX = 2.0
LINE_RUN_GAP_PX = 8.0        # split collinear inlier runs at gaps wider than this
LINE_RUN_MIN_PX = 18.0
CURVE_VETO_RADIUS_FT = 80.0  # runs curving tighter than this are left for arcs
CURVE_VETO_SAGITTA_PX = 1.5
SKEW_FOLD_DEG = 15.0         # skew estimates folded into [-15, +15] degrees
OPENING_HOST_RADIUS = 2.0    # labels further than this from every wall are dropped

# Evaluation gates (configuration; proportional rules applied in derive_gates)
GATE_ORIENTATION_DEG = 10.0
GATE_MIDPOINT_MEDIAN_FACTOR = 0.25
GATE_LENGTH_RATIO = 0.5
GATE_RADIUS_RATIO = 0.2
COST_WEIGHTS = (0.5, 0.3, 0.2)   # midpoint, length, orientation
HOST_MISMATCH_PENALTY = 0.25

# Build / mesh
SLAB_THICKNESS = 0.5
REPAIR_MAX_ITERS = 5
AUTO_REPAIR_MAX_PASSES = 3

# Session orchestration: bare-Reject re-extraction schedule (support, rng seed)
REJECT_SCHEDULE = ((20, 101), (18, 211), (22, 307), (16, 401), (24, 503))

TWO_PI = 2.0 * math.pi
