"""Package setup."""

import setuptools

__version__ = None
exec(open("resto/_version.py").read())

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="resto",
    version=__version__,
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    description="Two-stage speech denoising and restoration with quantized codecs.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Development Status :: 2 - Pre-Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Topic :: Multimedia :: Sound/Audio :: Speech",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    install_requires=[
        "torch>=1.10.0",
        "numpy>=1.20",
        "scipy>=1.7",
        "scikit-learn>=1.0.0",
        "joblib>=1.1",
        "setuptools>=62.3.2",
        "numba>=0.55.2",
        "termcolor>=1.1.0",
    ],
    extras_require={"test": ["hypothesis>=6.0"]},
    python_requires=">=3.7",
    entry_points={
        "console_scripts": [
            "resto=resto.tools.restoration_tool:main",
        ]
    },
)
