#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace panel_logit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, CSV, or an invalid option combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Named scalar attached to a singular-system report (e.g. a uniqueness determinant).
struct Diagnostic {
    std::string name;
    double value;
};

class SingularSystem : public Error {
public:
    SingularSystem(const std::string& what, double rcond, std::vector<Diagnostic> guards = {})
        : Error(what), rcond_(rcond), guards_(std::move(guards)) {}

    double rcond() const { return rcond_; }
    const std::vector<Diagnostic>& guards() const { return guards_; }

private:
    double rcond_;
    std::vector<Diagnostic> guards_;
};

class SingularWeight : public Error {
public:
    using Error::Error;
};

class NonpositiveAlpha : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

class NonpositivePhiHat : public Error {
public:
    using Error::Error;
};

class SingularRestrictionCovariance : public Error {
public:
    using Error::Error;
};

class AllReplicationsFailed : public Error {
public:
    using Error::Error;
};

}  // namespace panel_logit
