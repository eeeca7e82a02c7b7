#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gazeid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AngleOutOfRange : public Error {
public:
    explicit AngleOutOfRange(double angle_deg)
        : Error("visual angle out of range (|theta| >= 90 deg): " + std::to_string(angle_deg)),
          angle_deg(angle_deg) {}
    double angle_deg;
};

class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t row, std::size_t column, const std::string& what)
        : Error(file + ":" + std::to_string(row) + ": column " + std::to_string(column) + ": " + what),
          file(std::move(file)), row(row), column(column) {}
    std::string file;
    std::size_t row;
    std::size_t column;
};

class NonMonotonicTimestamps : public Error {
public:
    NonMonotonicTimestamps(const std::string& file, std::size_t row)
        : Error(file + ":" + std::to_string(row) + ": timestamp does not increase"), row(row) {}
    std::size_t row;
};

class InvalidRecording : public Error {
public:
    using Error::Error;
};

class SeriesTooShort : public Error {
public:
    SeriesTooShort(std::size_t have, std::size_t need)
        : Error("series too short: have " + std::to_string(have) + " samples, need " +
                std::to_string(need)),
          have(have), need(need) {}
    std::size_t have;
    std::size_t need;
};

class DegenerateSegment : public Error {
public:
    using Error::Error;
};

class EmptyTrainingSet : public Error {
public:
    EmptyTrainingSet() : Error("empty training set") {}
};

class UnknownFeatureName : public Error {
public:
    explicit UnknownFeatureName(const std::string& name)
        : Error("unknown feature name: " + name), name(name) {}
    std::string name;
};

class TooFewPoints : public Error {
public:
    TooFewPoints(std::size_t have, std::size_t k)
        : Error("k-means needs at least " + std::to_string(k) + " points, got " + std::to_string(have)) {}
};

class InsufficientEnrollmentData : public Error {
public:
    InsufficientEnrollmentData(std::string subject, std::string channel, std::size_t have, std::size_t need)
        : Error("subject " + subject + " has " + std::to_string(have) + " " + channel +
                " segments, need " + std::to_string(need)),
          subject(std::move(subject)), have(have), need(need) {}
    std::string subject;
    std::size_t have;
    std::size_t need;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class EmptyProbe : public Error {
public:
    EmptyProbe() : Error("probe has neither fixations nor saccades") {}
};

class InsufficientSubjects : public Error {
public:
    explicit InsufficientSubjects(std::size_t have)
        : Error("feature selection needs at least 2 subjects, got " + std::to_string(have)) {}
};

class EmptyScoreList : public Error {
public:
    EmptyScoreList() : Error("genuine and impostor score lists must be non-empty") {}
};

class MissingGroundTruth : public Error {
public:
    MissingGroundTruth() : Error("score matrix has no ground-truth labels") {}
};

class NonSquareMatrix : public Error {
public:
    NonSquareMatrix(std::size_t rows, std::size_t cols)
        : Error("one-to-one matching needs a square matrix, got " + std::to_string(rows) + "x" +
                std::to_string(cols)) {}
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class IdentityMismatch : public Error {
public:
    using Error::Error;
};

} // namespace gazeid
