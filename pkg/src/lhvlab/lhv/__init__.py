"""Local hidden-variable models behind one sampler/response interface."""
from .almeida import (
    AlmeidaIsotropicModel,
    AlmeidaNoisyModel,
    NielsenOperators,
    almeida_iso_pm_model,
    almeida_iso_povm_model,
    almeida_noisy_pm_model,
    almeida_noisy_povm_model,
    nielsen_operators,
    schmidt_decomposition,
)
from .base import HiddenState, LocalModel, check_responses
from .lifting import PovmLiftModel, TothAcinModel, hirsch_povm_model, multipartite_povm_model, toth_acin_model
from .simulate import SimulationResult, simulate, simulate_behavior, worker_count
from .toner import TonerMaps, TonerModel, solve_c3, toner_maps, toner_model
from .werner import (
    BVQB_TILT,
    BarrettModel,
    GisinGisinModel,
    RaimatModel,
    TiltedSphereModel,
    WernerModel,
    barrett_model,
    bvqb_model,
    gisin_gisin_model,
    raimat_model,
    werner_model,
)

MODEL_BUILDERS = {
    "werner": werner_model,
    "barrett": barrett_model,
    "almeida-isotropic": almeida_iso_pm_model,
    "almeida-isotropic-povm": almeida_iso_povm_model,
}

__all__ = [name for name in dir() if not name.startswith("_")]
