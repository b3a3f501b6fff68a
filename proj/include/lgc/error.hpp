#pragma once

#include <stdexcept>
#include <string>

namespace lgc {

struct SourcePos {
    int line = 0;
    int column = 0;
};

std::string to_string(const SourcePos& pos);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed program text.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, SourcePos pos);
    SourcePos pos;
};

// Well-formed text that is not a valid program (unbound names, arity, ...).
class ProgramError : public Error {
public:
    ProgramError(const std::string& msg, SourcePos pos);
    SourcePos pos;
};

// Dynamic failure while running a program.
class RuntimeFault : public Error {
public:
    using Error::Error;
};

class OutOfMemory : public Error {
public:
    using Error::Error;
};

// Violation of an internal invariant.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace lgc
