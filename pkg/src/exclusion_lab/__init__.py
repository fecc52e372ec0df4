# Copyright 2024 The exclusion-lab authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.
"""Exact kernels, Monte Carlo estimates and renormalized PAM solves for symmetric exclusion."""
from exclusion_lab.config import ExperimentConfig, LabConfig
from exclusion_lab.errors import CapacityError, CheckFailedError, ExclusionLabError, QuadratureError, UsageError
from exclusion_lab.kernels import KernelEngine
from exclusion_lab.lattice import Geometry, ParticleConfig, SpaceTimePoint

__all__ = [
    "KernelEngine",
    "LabConfig",
    "ExperimentConfig",
    "Geometry",
    "ParticleConfig",
    "SpaceTimePoint",
    "ExclusionLabError",
    "UsageError",
    "CapacityError",
    "QuadratureError",
    "CheckFailedError",
]
