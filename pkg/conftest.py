import hypothesis

# pytest --hypothesis-profile=fast for a quick pass
hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: fine-grid solves, deselect with -m 'not slow'")
