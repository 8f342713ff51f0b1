from .functions import (
    FUNCTION_NAMES,
    UNIMODAL_FUNCTIONS,
    eval_function,
    function_id,
    shift_vector,
)
from .manipulator import (
    ManipulatorParams,
    cvt_points,
    make_manipulator_tasks,
    manipulator_eval,
)
from .sampling import lhs_sample
from .suites import (
    MCF_GROUPS,
    SUITE_DIMS,
    TaskSpec,
    load_suite_manifest,
    make_mcf_suite,
    make_suite,
    save_suite_manifest,
    suite_manifest,
)
