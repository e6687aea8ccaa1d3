"""The public API of toricond.

# Library API

This module collects the commonly used names from all over the package and
makes them available directly in the `toricond` package. For most use cases
importing `toricond` alone is enough:
```python
import numpy as np
import toricond as tc

ensemble = tc.Ensemble.kostlan(n=1, degree=4)
disk = tc.Region.from_p_box([-np.inf], [0.0])

# Expected number of roots in the unit disk (2 for Kostlan quartics)
print(tc.expected_roots(ensemble, disk).value)

# The roots of one random system and their distance to the discriminant
f = tc.sample(ensemble, seed=7)
for root in tc.all_roots(f, ensemble):
    print(root, tc.distance_to_sigma(f, ensemble, root))
```

### All available attributes
- `toricond.logic.Field`
- `toricond.logic.ToricondError`
- `toricond.logic.InputError`
- `toricond.logic.ConvergenceError`
- `toricond.logic.DegenerateSystemError`
- `toricond.logic.prng.SeedStream`
- `toricond.logic.supports.Support`
- `toricond.logic.supports.Polytope`
- `toricond.logic.supports.mixed_volume_oracle`
- `toricond.logic.kahler.DiagonalCovariance`
- `toricond.logic.kahler.TorusPoint`
- `toricond.logic.kahler.KahlerFrame`
- `toricond.logic.kahler.momentum`
- `toricond.logic.kahler.invert_momentum`
- `toricond.logic.randsys.Ensemble`
- `toricond.logic.randsys.SparseSystem`
- `toricond.logic.randsys.Region`
- `toricond.logic.randsys.sample`
- `toricond.logic.randsys.kostlan_covariance`
- `toricond.logic.randsys.multinomial_weights`
- `toricond.logic.conditioning.condition_bounds`
- `toricond.logic.conditioning.distance_to_sigma`
- `toricond.logic.conditioning.restricted_condition`
- `toricond.logic.conditioning.kappa_over_region`
- `toricond.logic.volume.expected_roots`
- `toricond.logic.volume.mixed_volume_integral`
- `toricond.logic.volume.real_roots_bound`
- `toricond.logic.rootfind.all_roots`
- `toricond.logic.rootfind.real_roots`
- `toricond.api.logging.logger`
<br>
### Useful modules
- `toricond.logic.experiments`
- `toricond.logic.volume`
- `toricond.logic.conditioning`
- `toricond.run.config`
"""

from toricond.logic import (
    Field,
    ToricondError,
    InputError,
    ConvergenceError,
    DegenerateSystemError,
)
from toricond.logic.prng import SeedStream
from toricond.logic.supports import Support, Polytope, mixed_volume_oracle
from toricond.logic.kahler import (
    DiagonalCovariance,
    TorusPoint,
    KahlerFrame,
    momentum,
    invert_momentum,
)
from toricond.logic.randsys import (
    Ensemble,
    SparseSystem,
    Region,
    sample,
    kostlan_covariance,
    multinomial_weights,
)
from toricond.logic.conditioning import (
    condition_bounds,
    distance_to_sigma,
    restricted_condition,
    kappa_over_region,
)
from toricond.logic.volume import (
    expected_roots,
    mixed_volume_integral,
    real_roots_bound,
)
from toricond.logic.rootfind import all_roots, real_roots
from toricond.api.logging import logger


# Names to be available in toricond/__init__.py
__all__ = [
    "Field",
    "ToricondError",
    "InputError",
    "ConvergenceError",
    "DegenerateSystemError",
    "SeedStream",
    "Support",
    "Polytope",
    "mixed_volume_oracle",
    "DiagonalCovariance",
    "TorusPoint",
    "KahlerFrame",
    "momentum",
    "invert_momentum",
    "Ensemble",
    "SparseSystem",
    "Region",
    "sample",
    "kostlan_covariance",
    "multinomial_weights",
    "condition_bounds",
    "distance_to_sigma",
    "restricted_condition",
    "kappa_over_region",
    "expected_roots",
    "mixed_volume_integral",
    "real_roots_bound",
    "all_roots",
    "real_roots",
    "logger",
]
# Attributes are listed in the module docstring instead
__pdoc__ = {n: False for n in __all__}
