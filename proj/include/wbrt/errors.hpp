#pragma once

#include <stdexcept>
#include <string>

namespace wbrt {

enum class ErrorKind {
    argument,
    format,
    validation,
    missing_structure,
    segmentation_failure,
    degenerate_perturbation,
    landmark_infeasible,
    aperture_degenerate,
    io,
    usage,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* kind_name(ErrorKind kind);

[[noreturn]] void fail(ErrorKind kind, const std::string& msg);

}  // namespace wbrt
