# Mark adapters as a Python package for absolute imports.
