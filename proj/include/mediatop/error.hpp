#ifndef MEDIATOP_ERROR_HPP
#define MEDIATOP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mediatop {

enum class ErrorKind {
    domain,     // argument outside the mathematical domain (sigma <= 0, zero norm)
    range,      // index/epoch out of range
    shape,      // dimension mismatch
    config,     // invalid configuration (K > N, unknown metric, ...)
    data,       // malformed or invalid input data
    io,         // file could not be read or written
    input,      // missing inputs at call time
    invariant,  // internal invariant violated (exactness mismatch, ...)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace mediatop

#endif  // MEDIATOP_ERROR_HPP
