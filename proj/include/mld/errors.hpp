#pragma once

#include <stdexcept>
#include <string>

namespace mld {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct ZeroMatrix : Error {
    explicit ZeroMatrix(const std::string& msg) : Error(msg) {}
};

struct NotPositiveDefinite : Error {
    explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

struct NonUnitAtom : Error {
    explicit NonUnitAtom(const std::string& msg) : Error(msg) {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};

struct ZeroData : Error {
    explicit ZeroData(const std::string& msg) : Error(msg) {}
};

struct SizeMismatch : Error {
    explicit SizeMismatch(const std::string& msg) : Error(msg) {}
};

struct EmptySamples : Error {
    explicit EmptySamples(const std::string& msg) : Error(msg) {}
};

struct EmptyTrainingSet : Error {
    explicit EmptyTrainingSet(const std::string& msg) : Error(msg) {}
};

struct InvalidK : Error {
    explicit InvalidK(const std::string& msg) : Error(msg) {}
};

struct InvalidVariance : Error {
    explicit InvalidVariance(const std::string& msg) : Error(msg) {}
};

struct SubsetTooLarge : Error {
    explicit SubsetTooLarge(const std::string& msg) : Error(msg) {}
};

struct DictMismatch : Error {
    explicit DictMismatch(const std::string& msg) : Error(msg) {}
};

struct ImageTooSmall : Error {
    explicit ImageTooSmall(const std::string& msg) : Error(msg) {}
};

struct IncompleteTiling : Error {
    explicit IncompleteTiling(const std::string& msg) : Error(msg) {}
};

struct EmptyCodes : Error {
    explicit EmptyCodes(const std::string& msg) : Error(msg) {}
};

struct DegenerateGraph : Error {
    explicit DegenerateGraph(const std::string& msg) : Error(msg) {}
};

struct SingleClass : Error {
    explicit SingleClass(const std::string& msg) : Error(msg) {}
};

struct EmptyTrainSet : Error {
    explicit EmptyTrainSet(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace mld
