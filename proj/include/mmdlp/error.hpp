#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmdlp {

enum class ErrorCode {
    TruncatedFile,
    MalformedFacet,
    EmptyMesh,
    MissingMeshFile,
    DuplicateMaterialId,
    UnitOutsideBuildVolume,
    InvalidManifest,
    OpenContour,
    IoFailure,
    OverlapError,
    UnknownMaterial,
    NonWatertightUnit,
    ProgramSyntax,
    InvalidArgument,
    SimulationViolation,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this one exception type; the
// code tells callers (and the CLI exit-status mapping) what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mmdlp
