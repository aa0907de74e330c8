"""Shared-autonomy teleoperation engine driven by phase-switching behavior trees.

Activities of daily living (pouring, and anything shaped like it) are
written as small three-level behavior trees whose leaf action nodes reshape
a low-dimensional user input into constrained object motion. The package
ships the tree engine, the geometry behind the action nodes, a kinematic
world, the `.activity` file format, a deterministic replay CLI, and a live
WebSocket session server for the cockpit UI.
"""

from .activity import (
    ActivityDocument,
    ActivityError,
    Diagnostic,
    ObjectSpec,
    PoseSpec,
    bundled_activity_path,
    diagnose,
    parse,
    serialize,
)
from .bt import (
    BindingError,
    Node,
    NodeKind,
    NodeStatus,
    TickContext,
    action,
    condition,
    fallback,
    idle_ledger,
    sequence,
    status_ledger,
    tick_fallback,
    tick_node,
    tick_sequence,
)
from .engine import (
    DEFAULT_GAIN,
    DEFAULT_TICK_RATE_HZ,
    ConditionKind,
    ConditionSpec,
    Fallthrough,
    Phase,
    PhastTree,
    ScanKind,
    ScanSpec,
    StructureError,
    Violation,
    active_phase,
    build_tree,
    condition_holds,
    phases_to_root,
    tick,
    validate,
)
from .geometry import (
    EPS_LEN,
    DegenerateAxisError,
    DegenerateLineError,
    GeometryError,
    Pose,
    commanded_point,
    distance,
    input_to_angle,
    pose_compose,
    project_to,
    quat_from_axis_angle,
    quat_mul,
    quat_normalize,
    quat_rotate,
    rotate_about_pivot,
    rotation_axis,
    rotation_matrix,
    tilt_deg,
    vec3,
)
from .service import TeleopServer, TraceRecord, initial_snapshot, read_trace, replay, serve
from .world import (
    EE_NAME,
    ObjectState,
    TickSnapshot,
    WorldLookupError,
    WorldState,
    anchor_world,
    apply_pose,
    ee_pose,
    snapshot,
)

__version__ = "0.1.0"
