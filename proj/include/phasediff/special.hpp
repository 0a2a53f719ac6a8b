// Copyright 2026 The phasediff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace phasediff {

/// Error function (2/sqrt(pi)) int_0^x exp(-y^2) dy. Backed by the C++
/// standard library, which is accurate to about one ulp.
double erf(double x) noexcept;

/// 1 - erf(x) without cancellation for large positive x.
double erfc(double x) noexcept;

/// 1 + erf(x), evaluated as erfc(-x) so it stays accurate for x << 0.
double one_plus_erf(double x) noexcept;

}  // namespace phasediff
