# Copyright 2026 The pefkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Perfect concept erasure over finite representation supports.

Thin wrappers over the native ``_pefkit`` module that decode its JSON results
into dictionaries. Distributions are plain probability lists; when ids are
not given, group ``g`` owns the ids following those of groups ``0..g-1``.
"""

import json

from pefkit import _pefkit

entropy = _pefkit.entropy
check_permutation_equal = _pefkit.check_permutation_equal
objective_j = _pefkit.objective_j
plugin_mi = _pefkit.plugin_mi
tv_distance = _pefkit.tv_distance


def greedy_mec(p, q):
    """Greedy minimum entropy coupling: rows, cols, mass, entropy_bits."""
    return json.loads(_pefkit.greedy_mec(p, q))


def mec_oracle(p, q, max_cells=20):
    """Exact minimum entropy coupling by vertex enumeration."""
    return json.loads(_pefkit.mec_oracle(p, q, max_cells))


def funnel_bounds(groups, priors=None, n_points=101):
    return json.loads(_pefkit.funnel_bounds(groups, priors, n_points))


def pic_spectrum(groups, priors=None, ids=None):
    return json.loads(_pefkit.pic_spectrum(groups, priors, ids))


def generate(setting, groups=2, support=100, samples=10000, seed=0, alpha=1.0):
    """Synthetic groups: {"truth": grouped distributions, "samples": [[x, a]]}."""
    return json.loads(
        _pefkit.generate(setting, groups, support, samples, seed, alpha))


def erase(samples, truth=None, tol=None, use_bo=False, bo_budget=100,
          bo_seed=0, out_size=None, oracle=False, apply_seed=0):
    """Builds an erasure function and applies it to ``samples``.

    With ``truth`` (the dictionary returned by ``generate``) the function is
    built from the known distributions; otherwise from the empirical ones.
    Returns {"report", "function", "erased"}.
    """
    pairs = [tuple(s) for s in samples]
    if truth is None:
        out = _pefkit.erase_samples(pairs, tol, use_bo, bo_budget, bo_seed,
                                    out_size, oracle, apply_seed)
    else:
        out = _pefkit.erase_distributions(json.dumps(truth), pairs, tol,
                                          use_bo, bo_budget, bo_seed,
                                          out_size, oracle, apply_seed)
    return json.loads(out)


__all__ = [
    "check_permutation_equal",
    "entropy",
    "erase",
    "funnel_bounds",
    "generate",
    "greedy_mec",
    "mec_oracle",
    "objective_j",
    "pic_spectrum",
    "plugin_mi",
    "tv_distance",
]
