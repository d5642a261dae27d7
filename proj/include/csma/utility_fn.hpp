#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "csma/rational.hpp"

namespace csma {

// Throughput utility U(.): non-negative, non-decreasing, concave,
// differentiable on [0, inf). The admission closed form needs the inverse of
// U' exactly, so every catalog entry ships value / derivative / inverse
// derivative in closed form.
//
// Both shipped families have U'(0) = 1; the queue-bound float-safety
// argument in the engine relies on V * U'(0) being computed without
// rounding, which holds whenever U'(0) == 1.
class UtilityFn {
  public:
    virtual ~UtilityFn() = default;
    virtual std::string name() const = 0;
    virtual double value(double x) const = 0;
    virtual double uprime(double x) const = 0;
    // Inverse of U' where defined; callers guard y <= 0 and y >= U'(0)
    // themselves (see compute_eta).
    virtual double uprime_inv(double y) const = 0;
    virtual double uprime0() const = 0;
    virtual Rational uprime0_rational() const = 0;
};

// U(x) = log(1 + x); U'(x) = 1/(1+x); U'^{-1}(y) = 1/y - 1.
class LogUtility final : public UtilityFn {
  public:
    std::string name() const override { return "log1p"; }
    double value(double x) const override { return std::log1p(x); }
    double uprime(double x) const override { return 1.0 / (1.0 + x); }
    double uprime_inv(double y) const override { return 1.0 / y - 1.0; }
    double uprime0() const override { return 1.0; }
    Rational uprime0_rational() const override { return Rational(1); }
};

// Shifted alpha-fair family: U(x) = ((1+x)^(1-a) - 1) / (1-a), a > 0, a != 1.
// Shifting by 1 keeps U(0) = 0 and U'(0) = 1 while preserving concavity.
class AlphaFairUtility final : public UtilityFn {
  public:
    explicit AlphaFairUtility(double alpha) : alpha_(alpha) {
        if (alpha <= 0.0) throw std::invalid_argument("alpha_fair: alpha must be > 0");
        if (alpha == 1.0) throw std::invalid_argument("alpha_fair: alpha=1 is log1p");
    }
    std::string name() const override { return "alpha_fair(" + std::to_string(alpha_) + ")"; }
    double value(double x) const override {
        return (std::pow(1.0 + x, 1.0 - alpha_) - 1.0) / (1.0 - alpha_);
    }
    double uprime(double x) const override { return std::pow(1.0 + x, -alpha_); }
    double uprime_inv(double y) const override { return std::pow(y, -1.0 / alpha_) - 1.0; }
    double uprime0() const override { return 1.0; }
    Rational uprime0_rational() const override { return Rational(1); }

  private:
    double alpha_;
};

std::shared_ptr<const UtilityFn> make_utility(const std::string& kind, double alpha = 2.0);

}  // namespace csma
