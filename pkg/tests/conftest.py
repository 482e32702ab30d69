import logging
import os
import sys

import hypothesis
import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

np.seterr(all="warn", under="ignore")
logging.getLogger("circlecoords").setLevel(logging.ERROR)


def pytest_terminal_summary(terminalreporter):
    results = sys.modules.get("test_acceptance")
    if results is not None and results.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results.RESULTS):
            terminalreporter.write_line(line)
