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
"""Exact transition kernels of independent walkers and labelled exclusion particles."""
from .engine import KernelEngine
from .lru import RowCache
from .states import GeneratorMatrix, StateIndex, Window, build_generator, enumerate_states, window_for
from .uniformization import KernelRow, exclusion_kernel_exact, exclusion_kernel_mc, uniformized_propagate
from .walk import (
    product_kernel_rw,
    srw_kernel,
    srw_kernel_1d,
    srw_kernel_1d_forward,
    torus_walk_spectral,
    torus_walk_table,
)

__all__ = [
    "KernelEngine",
    "RowCache",
    "GeneratorMatrix",
    "StateIndex",
    "Window",
    "build_generator",
    "enumerate_states",
    "window_for",
    "KernelRow",
    "exclusion_kernel_exact",
    "exclusion_kernel_mc",
    "uniformized_propagate",
    "product_kernel_rw",
    "srw_kernel",
    "srw_kernel_1d",
    "srw_kernel_1d_forward",
    "torus_walk_spectral",
    "torus_walk_table",
]
