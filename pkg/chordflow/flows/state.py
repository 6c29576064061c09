# Copyright 2025 American Express Travel Related Services Company, Inc.
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
# in compliance with the License. You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software distributed under the License
# is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
# or implied. See the License for the specific language governing permissions and limitations under
# the License.
"""Homotopy states: the current images of a boundary-pair family."""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from chordflow.domain import DomainSpec
from chordflow.pathspace import DiscreteCurve, PathFamily, reverse

from .descent import curve_F

Key = Tuple[int, int]


@dataclass
class HomotopyState:
    """Seeds of a path family with the curves they are currently mapped to.

    Only pairs i < j evolve; (j, i) always holds the reversed curve and (i, i) stays constant."""

    seeds: PathFamily
    current: Dict[Key, DiscreteCurve]
    tag_log: List[str] = field(default_factory=list)
    constant_seeds_fixed: bool = True
    iterations: int = 0

    @staticmethod
    def identity(family: PathFamily) -> "HomotopyState":
        return HomotopyState(seeds=family, current=dict(family.curves))

    def evolving_keys(self) -> List[Key]:
        return sorted(k for k in self.current if k[0] < k[1])

    def values(self, spec: DomainSpec) -> Dict[Key, float]:
        return {key: curve_F(self.current[key], spec) for key in self.evolving_keys()}

    def F(self, spec: DomainSpec) -> float:
        return max(self.values(spec).values(), default=0.0)

    def update(self, key: Key, curve: DiscreteCurve) -> None:
        i, j = key
        if i == j:
            raise ValueError(f"constant seed {key} cannot be deformed")
        if i > j:
            key, curve = (j, i), reverse(curve)
        self.current[key] = curve
        self.current[(key[1], key[0])] = reverse(curve)

    def tag(self, kind: str) -> None:
        """Append a step kind, merging runs of equal kinds into one segment"""
        if not self.tag_log or self.tag_log[-1] != kind:
            self.tag_log.append(kind)

    def copy(self) -> "HomotopyState":
        return HomotopyState(
            seeds=self.seeds,
            current=dict(self.current),
            tag_log=list(self.tag_log),
            constant_seeds_fixed=self.constant_seeds_fixed,
            iterations=self.iterations,
        )
