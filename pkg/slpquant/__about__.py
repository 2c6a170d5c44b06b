"""Information about slpquant module."""
__title__ = "slpquant"
__description__ = "Exact quantization of two-stage and multistage stochastic linear programs with continuous costs"
__version__ = "0.1.0"
__author__ = "slpquant developers"
__author_email__ = "slpquant@users.noreply.github.com"
__url__ = "https://github.com/slpquant/slpquant"
__license__ = "MIT"
