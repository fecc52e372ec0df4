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
"""Exceptions raised by the laboratory."""


class ExclusionLabError(Exception):
    """Base class for every error raised by this package."""


class UsageError(ExclusionLabError, ValueError):
    """An operation was called with arguments outside its domain."""


class CapacityError(ExclusionLabError):
    """A state space or table would exceed the configured budget.

    :type required: int
    :param required: The size the operation would need.

    :type budget: int
    :param budget: The configured limit.
    """

    def __init__(self, what, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(f"{what} needs {required} entries but the budget is {budget}; "
                         f"raise max_states to at least {required}")


class QuadratureError(ExclusionLabError):
    """Adaptive quadrature stopped before reaching its tolerance."""

    def __init__(self, message, residual_estimate):
        self.residual_estimate = residual_estimate
        super().__init__(f"{message} (last error estimate {residual_estimate:.3e})")


class CheckFailedError(ExclusionLabError):
    """A numerical check of an identity or bound did not hold."""
