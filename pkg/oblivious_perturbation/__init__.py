"""oblivious_perturbation package initialization"""

from .main import main
from .version import __version__ as version
