from hypothesis import settings

# numba JIT compilation on first call makes wall-clock deadlines flaky.
settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")
