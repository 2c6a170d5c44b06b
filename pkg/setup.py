import pathlib
from setuptools import setup

here = pathlib.Path(__file__).parent
readme = (here / "README.md").read_text(encoding="utf-8")

about = {}
with open(here / "slpquant" / "__about__.py") as f:
    exec(f.read(), about)

setup(
    name=about["__title__"],
    version=about["__version__"],
    description=about["__description__"],
    long_description=readme,
    long_description_content_type="text/markdown",
    url=about["__url__"],
    author=about["__author__"],
    author_email=about["__author_email__"],
    license=about["__license__"],
    keywords="stochastic programming, linear programming, polyhedra, scenario tree, exact arithmetic",
    package_data={"slpquant": ["py.typed", "instances/*.json"]},
    packages=["slpquant"],
    install_requires=["numpy", "scipy", "mpmath"],
    entry_points={"console_scripts": ["slpquant=slpquant.cli:main"]},
    python_requires=">=3.8",
    classifiers=[
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3.8",
        "Operating System :: OS Independent",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    zip_safe=False,
    include_package_data=True,
)
