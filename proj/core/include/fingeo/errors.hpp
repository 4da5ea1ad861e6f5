#pragma once

#include <stdexcept>
#include <string>

namespace fingeo {

// Broad failure classes, used by the CLI to pick exit codes.
enum class ErrorClass {
    Input,     // malformed or unsupported input data
    Numeric,   // reconstruction / estimation failure on valid input
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string name, const std::string& what)
        : std::runtime_error(what), cls_(cls), name_(std::move(name)) {}
    ErrorClass error_class() const noexcept { return cls_; }
    const std::string& name() const noexcept { return name_; }

private:
    ErrorClass cls_;
    std::string name_;
};

#define FINGEO_DEFINE_ERROR(Name, Class)                               \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what)                         \
            : Error(ErrorClass::Class, #Name, what) {}                 \
    }

FINGEO_DEFINE_ERROR(UnitError, Input);
FINGEO_DEFINE_ERROR(FormatError, Input);
FINGEO_DEFINE_ERROR(UnsupportedError, Input);
FINGEO_DEFINE_ERROR(TypeMismatchError, Input);
FINGEO_DEFINE_ERROR(DimensionError, Input);
FINGEO_DEFINE_ERROR(PreconditionError, Numeric);
FINGEO_DEFINE_ERROR(NoForegroundError, Numeric);
FINGEO_DEFINE_ERROR(NoRidgeSignalError, Numeric);
FINGEO_DEFINE_ERROR(ImplausibleScaleError, Numeric);
FINGEO_DEFINE_ERROR(InsufficientContourError, Numeric);
FINGEO_DEFINE_ERROR(DegenerateRowError, Numeric);
FINGEO_DEFINE_ERROR(ReconstructionError, Numeric);
FINGEO_DEFINE_ERROR(UnwarpError, Numeric);

#undef FINGEO_DEFINE_ERROR

} // namespace fingeo
