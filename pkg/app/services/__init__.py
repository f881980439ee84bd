"""
Services package.

This package contains the computational core of the toolkit: code
construction, circuits and sampling, detector error models, decoders, and
the Monte Carlo and fitting layers built on top of them. Routes and the CLI
call into these modules; nothing here depends on the web layer.
"""
