"""Noise-adaptive circulant preconditioners for ill-posed symmetric Toeplitz and BTTB systems."""
from .errors import *  # noqa: F401,F403
from .structured import (
    BTTBOperator,
    Circulant,
    SkewCirculant,
    SymToeplitz,
    bttb_apply,
    circulant_apply,
    closest_circulant,
    matvec,
    skew_circulant_apply,
    split_circulant_skew,
    toeplitz_apply,
    unvec,
    vec,
)
from .spectral import (
    BCCBPreconditioner,
    CirculantSpectrum,
    Fill,
    Rule,
    TruncatedSpectrum,
    apply,
    apply_inverse,
    apply_pseudoinverse,
    build_preconditioner_1d,
    build_preconditioner_bttb,
    select_q_1d,
    select_q_kron_equal,
    select_q_pair,
    shrink,
    shrink_pair,
    spectrum,
)
from .krylov import (
    ProblemInstance,
    SolveReport,
    rrgmres,
    solve_preconditioned,
    solve_preconditioned_zero_start,
    solve_unpreconditioned,
)
from .problems import (
    BlurSpec,
    GravitySpec,
    NoisyData,
    add_noise,
    blur_problem,
    blur_test_image,
    gravity_problem,
    portrait_image,
)
from .pgm import read_image, write_image

__version__ = "0.1.0"
