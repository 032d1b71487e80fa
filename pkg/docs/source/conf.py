# Sphinx configuration of the resto API reference.
import os
import sys

sys.path.insert(0, os.path.abspath("../../"))

from resto import __version__  # noqa: E402

project = "resto"
release = __version__
version = ".".join(__version__.split(".")[:2])

extensions = [
    "numpydoc",
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx_autodoc_typehints",
]

autosummary_generate = True
autoclass_content = "class"
numpydoc_show_class_members = False
html_show_sourcelink = False

intersphinx_mapping = {
    "python": ("https://docs.python.org/3/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "torch": ("https://pytorch.org/docs/stable/", None),
}

exclude_patterns = []

# the theme is only imported for local builds
if os.environ.get("READTHEDOCS", None) != "True":
    import sphinx_rtd_theme

    html_theme = "sphinx_rtd_theme"
    html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
