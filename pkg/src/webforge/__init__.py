"""webforge: generate working web applications from plain-language requirements.

The engine turns a requirement (text, optionally a design image) into a test
suite, develops the application against a starter template, exercises it
through a browser driver, and refines it from test feedback until the suite
passes or the round budget runs out.
"""

__version__ = "0.1.0"
