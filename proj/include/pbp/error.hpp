#pragma once

#include <stdexcept>
#include <string>

namespace pbp {

// Base of everything this library throws. Callers that only want to report
// can catch this; the harness uses the concrete type to classify failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

#define PBP_DEFINE_ERROR(Name, tag)                         \
    class Name : public Error {                              \
    public:                                                  \
        using Error::Error;                                  \
        const char* kind() const noexcept override { return tag; } \
    };

PBP_DEFINE_ERROR(IoError, "io")
PBP_DEFINE_ERROR(FormatError, "format")
PBP_DEFINE_ERROR(ParameterError, "parameter")
PBP_DEFINE_ERROR(DimensionError, "dimension")
PBP_DEFINE_ERROR(EmptySelectionError, "empty-selection")
PBP_DEFINE_ERROR(DegenerateEstimateError, "degenerate-estimate")
PBP_DEFINE_ERROR(DegenerateIlluminantError, "degenerate-illuminant")
PBP_DEFINE_ERROR(DegenerateBrightnessError, "degenerate-brightness")

#undef PBP_DEFINE_ERROR

} // namespace pbp
