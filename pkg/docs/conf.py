# -*- coding: utf-8 -*-
#
# dyne.lab documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os
from datetime import datetime
import sphinx_rtd_theme

# the package lives under src/
sys.path.insert(0, os.path.abspath('../src'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
]

templates_path = []
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = 'dyne.lab'
copyright = '%s, dyne.lab maintainers' % datetime.now().year

# The short X.Y version.
version = '1.0'
# The full version, including alpha/beta/rc tags.
release = '1.0.0'

exclude_patterns = ['_build']
default_role = 'py:obj'
show_authors = True
pygments_style = 'colorful'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
}

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_title = 'dyne.lab Documentation'
html_short_title = 'dyne.lab User Guide'
html_static_path = []
html_show_copyright = True
htmlhelp_basename = 'dynelabdoc'
