"""Cell-centred finite-volume gradient reconstruction on unstructured 2D meshes."""
from .mesh import *  # noqa: F401,F403
from .grids import *  # noqa: F401,F403
from .fields import *  # noqa: F401,F403
from .gradients import *  # noqa: F401,F403
from .ls1d import *  # noqa: F401,F403
from .poisson import *  # noqa: F401,F403
from .analysis import *  # noqa: F401,F403
from . import analysis, fields, gradients, grids, ls1d, mesh, poisson

__version__ = "0.1.0"
