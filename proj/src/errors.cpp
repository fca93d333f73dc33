#include "wbrt/errors.hpp"

namespace wbrt {

const char* kind_name(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::argument: return "argument error";
    case ErrorKind::format: return "format error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::missing_structure: return "missing-structure error";
    case ErrorKind::segmentation_failure: return "segmentation-failure error";
    case ErrorKind::degenerate_perturbation: return "degenerate-perturbation error";
    case ErrorKind::landmark_infeasible: return "landmark-infeasible error";
    case ErrorKind::aperture_degenerate: return "aperture-degenerate error";
    case ErrorKind::io: return "io error";
    case ErrorKind::usage: return "usage error";
    case ErrorKind::internal: return "internal error";
    }
    return "error";
}

void fail(ErrorKind kind, const std::string& msg)
{
    throw Error(kind, msg);
}

}  // namespace wbrt
