# flake8: noqa

from hypothesis import settings
from toricond.util.code import UNITTEST_PROFILES


for name, profile in UNITTEST_PROFILES.items():
    settings.register_profile(name, **profile)
settings.load_profile("dev")
