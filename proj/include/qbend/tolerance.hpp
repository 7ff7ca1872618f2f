// Copyright 2026 the qbend authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace qbend {

/// Numerical tolerances shared by the LP engine and its callers.
/// Passed explicitly everywhere; there are no global knobs.
struct ToleranceSet {
    double feas_tol = 1e-7;     // primal feasibility / Farkas certificate slack
    double duality_tol = 1e-6;  // |primal obj - dual obj| on Optimal
    double zero_pivot = 1e-9;   // pivot elements below this are treated as zero
};

}  // namespace qbend
