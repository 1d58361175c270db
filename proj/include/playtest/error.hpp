#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace playtest {

// Base for every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed document; line and column are 1-based.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t line, std::size_t column)
        : Error("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class DanglingReference : public Error {
public:
    DanglingReference(std::string site, std::string target)
        : Error("dangling reference: '" + site + "' -> '" + target + "'"),
          site_(std::move(site)),
          target_(std::move(target)) {}

    const std::string& site() const noexcept { return site_; }
    const std::string& target() const noexcept { return target_; }

private:
    std::string site_;
    std::string target_;
};

class InvariantViolation : public Error {
public:
    InvariantViolation(std::string rule, const std::string& message)
        : Error("invariant violation [" + rule + "]: " + message), rule_(std::move(rule)) {}

    const std::string& rule() const noexcept { return rule_; }

private:
    std::string rule_;
};

#define PLAYTEST_DEFINE_ERROR(name)   \
    class name : public Error {       \
    public:                           \
        using Error::Error;           \
    }

PLAYTEST_DEFINE_ERROR(UnknownEvent);
PLAYTEST_DEFINE_ERROR(UnknownCareer);
PLAYTEST_DEFINE_ERROR(UnknownObject);
PLAYTEST_DEFINE_ERROR(UnknownCategory);
PLAYTEST_DEFINE_ERROR(IllegalAction);
PLAYTEST_DEFINE_ERROR(ClockRegression);
PLAYTEST_DEFINE_ERROR(EventInProgress);
PLAYTEST_DEFINE_ERROR(CategoryLocked);
PLAYTEST_DEFINE_ERROR(ChainOrderViolation);
PLAYTEST_DEFINE_ERROR(RequirementsUnmet);
PLAYTEST_DEFINE_ERROR(Deadlock);
PLAYTEST_DEFINE_ERROR(TargetAboveCap);
PLAYTEST_DEFINE_ERROR(CareerMissingInBuild);
PLAYTEST_DEFINE_ERROR(NoRelationshipEvents);
PLAYTEST_DEFINE_ERROR(InvalidArgument);
PLAYTEST_DEFINE_ERROR(IoError);

#undef PLAYTEST_DEFINE_ERROR

}  // namespace playtest
