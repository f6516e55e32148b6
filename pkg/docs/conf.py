# Sphinx configuration for the Shapley Minimax docs.
#
# Build with:  sphinx-build -b html . _build/html
import os

extensions = []

source_suffix = '.rst'
master_doc = 'index'

project = 'Shapley Minimax'
copyright = '2026, Shapley Minimax developers'
author = 'Shapley Minimax developers'
version = '0.1'
release = '0.1'

language = 'en'
exclude_patterns = ['_build']
pygments_style = 'sphinx'

# Read the Docs supplies its own theme.
html_theme = 'default'
if os.environ.get('READTHEDOCS') != 'True':
    html_theme = 'sphinx_rtd_theme'

htmlhelp_basename = 'ShapleyMinimaxdoc'

man_pages = [
    (master_doc, 'shapley-minimax', 'Shapley Minimax Documentation', [author], 1),
]
