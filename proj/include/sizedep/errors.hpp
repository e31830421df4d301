#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sizedep {

/// Argument outside the mathematical domain of a function.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative numerical method failed to reach its tolerance.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The model could not be evaluated at a data point (e.g. the tail
/// probability underflowed to zero).
class evaluation_error : public numerical_error {
public:
    evaluation_error(const std::string& what, std::size_t point_index)
        : numerical_error(what), point_index_(point_index) {}

    std::size_t point_index() const noexcept { return point_index_; }

private:
    std::size_t point_index_;
};

/// Problems with user-supplied data. The CLI maps these to exit code 2.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class parse_error : public data_error {
public:
    parse_error(std::string source, std::size_t line, const std::string& message)
        : data_error(source + ":" + std::to_string(line) + ": " + message),
          source_(std::move(source)),
          line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// A value violates an invariant of a domain type (ordering, range, count).
class invariant_error : public data_error {
public:
    using data_error::data_error;
};

/// Every year failed to converge. The CLI maps this to exit code 3.
class fit_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sizedep
