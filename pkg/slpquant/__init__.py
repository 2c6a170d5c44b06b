from .rational_linalg import *
from . import lp
from .polyhedron import *
from .triangulate import *
from .complexes import *
from .quantize import *
from .stochastic import *
from .serialization import *
from .csv_utils import *
from .file_utils import *
