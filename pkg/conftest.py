"""
Root conftest.py - Test configuration for all tests.

This file is automatically discovered by pytest and runs before any tests.
It points Settings at the test env file BEFORE any application code is
imported, and keeps a developer's real provider key out of the test run.
"""

import os

os.environ["ENV_FILE"] = "env.test"
os.environ.pop("RAG_CONFIG", None)
os.environ.pop("RAG_PROVIDER_API_KEY", None)
