#pragma once

#include <stdexcept>
#include <string>

namespace hmx {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// invalid geometry (overlapping spheres, malformed mesh)
class GeometryError : public Error {
public:
    using Error::Error;
};

// a problem dimension exceeds a configured cap
class SizeError : public Error {
public:
    using Error::Error;
};

// two distinct panels share a collocation point, or a dense factorization hit a zero pivot
class SingularityError : public Error {
public:
    using Error::Error;
};

// caller violated a shape or argument precondition
class ContractError : public Error {
public:
    using Error::Error;
};

// non-finite values produced by a kernel, or FP32 overflow during a cast
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hmx
