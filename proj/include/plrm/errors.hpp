#pragma once

#include <stdexcept>
#include <string>

namespace plrm {

/// Violated precondition or dimension mismatch in an in-process call.
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Information-type matrix is numerically singular (reciprocal condition
/// number below the 1e-12 gate). Carries the condition estimate.
class singular_information : public std::runtime_error {
public:
    singular_information(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// L^T M L (the contrast-projected covariance) is numerically singular.
class singular_contrast : public std::runtime_error {
public:
    singular_contrast(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// Power/sample-size formulas are undefined when the alternative sits on
/// the null (q = 0).
class null_parameter_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input data file could not be parsed against its schema.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every grid point of a tuning sweep was skipped.
class tuning_failed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every replication of a Monte-Carlo cell was discarded.
class study_failed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace plrm
