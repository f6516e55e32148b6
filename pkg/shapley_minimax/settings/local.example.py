from shapley_minimax.settings.dev import *  # noqa

# Override settings here

# Tighter sampling for quick local experiments
# MINIMAX_SAMPLES = 1000
