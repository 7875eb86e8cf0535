#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ser {

// Base for bad inputs, bad files, bad configuration (CLI exit code 1).
class UserError : public std::runtime_error {
public:
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// Base for numerical failures inside an algorithm (CLI exit code 2).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public UserError {
public:
    using UserError::UserError;
};

class IoError : public UserError {
public:
    using UserError::UserError;
};

class DisconnectedGraph : public UserError {
public:
    DisconnectedGraph(const std::string& msg, std::vector<int> sizes)
        : UserError(msg), component_sizes(std::move(sizes)) {}
    std::vector<int> component_sizes;
};

class DegenerateData : public UserError {
public:
    using UserError::UserError;
};

class RankDegenerate : public UserError {
public:
    using UserError::UserError;
};

class SingleClass : public UserError {
public:
    using UserError::UserError;
};

class EigenFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class TrainingDiverged : public NumericError {
public:
    TrainingDiverged(const std::string& msg, int ep) : NumericError(msg), epoch(ep) {}
    int epoch;
};

class SmoFailure : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace ser
