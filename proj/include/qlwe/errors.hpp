// Copyright 2026 The qlwe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qlwe {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid modulus, dimension or parameter combination.
struct ParameterError : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

/// An enumeration or dense-simulation size guard was exceeded.
struct GuardViolation : Error {
    GuardViolation(std::string guard_name, const std::string &what)
        : Error(guard_name + ": " + what), guard(std::move(guard_name)) {}
    std::string guard;
};

/// Gadget decoding produced an inconsistent preimage.
struct InversionFailed : Error {
    using Error::Error;
};

/// Brute-force inversion found two preimages inside the decoding ball.
struct AmbiguousPreimage : Error {
    using Error::Error;
};

struct UnsupportedOperation : Error {
    using Error::Error;
};

}  // namespace qlwe
