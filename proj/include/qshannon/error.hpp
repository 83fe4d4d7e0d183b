// Copyright 2026 The qshannon Authors
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

#include <limits>
#include <stdexcept>
#include <string>

namespace qshannon {

enum class ErrorKind {
    NonHermitian,
    DomainError,
    DimMismatch,
    NotPSD,
    NotPure,
    OperatorOutOfRange,
    LambdaViolated,
    BadShape,
    OverlappingSets,
    SizeMismatch,
    ThetaOutOfRange,
    InfeasibleScale,
    ScaleError,
    TooLarge,
    FlagMissing,
    ConfigError,
};

inline const char *error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonHermitian: return "NonHermitian";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::NotPure: return "NotPure";
        case ErrorKind::OperatorOutOfRange: return "OperatorOutOfRange";
        case ErrorKind::LambdaViolated: return "LambdaViolated";
        case ErrorKind::BadShape: return "BadShape";
        case ErrorKind::OverlappingSets: return "OverlappingSets";
        case ErrorKind::SizeMismatch: return "SizeMismatch";
        case ErrorKind::ThetaOutOfRange: return "ThetaOutOfRange";
        case ErrorKind::InfeasibleScale: return "InfeasibleScale";
        case ErrorKind::ScaleError: return "ScaleError";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::FlagMissing: return "FlagMissing";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {
    }
    ErrorKind kind() const noexcept {
        return kind_;
    }

   private:
    ErrorKind kind_;
};

/// Tolerance for Hermiticity, positivity and trace checks.
inline constexpr double kTol = 1e-9;
/// Eigenvalues at or below this are treated as zero.
inline constexpr double kRankTol = 1e-9;
/// Tolerance for Kraus and POVM completeness.
inline constexpr double kCompletenessTol = 1e-8;
/// Largest dense Hilbert space dimension the library will build.
inline constexpr std::size_t kDenseDimLimit = 4096;

/// Divergences outside the support condition evaluate to this sentinel.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_infinite(double x) {
    return x == kInfinity;
}

}  // namespace qshannon
