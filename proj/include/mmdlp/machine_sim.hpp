#pragma once

#include "mmdlp/error.hpp"
#include "mmdlp/jobplan.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmdlp {

enum class Position { A, B, Clean, InTransit };

std::string_view to_string(Position p);

struct MachineState {
    Position position = Position::InTransit;
    std::int64_t z_e4 = 0;
    std::optional<Pool> last_exposed_pool;
    bool contaminated = false;
    bool cleaned_since_exposure = true;
    double elapsed = 0; // s
    std::map<std::string, std::size_t, std::less<>> cured_layers;

    friend bool operator==(const MachineState&, const MachineState&) = default;
};

enum class ViolationKind {
    ExposeOffStation,
    PoolMismatch,
    Contamination,
    NonMonotonicZ,
    MissingHome,
    MissingEnd,
    UnknownCommand,
    UnknownMaterial,
    CleanOffStation,
    CommandAfterEnd,
};

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::size_t command_index; // == command count for MissingEnd
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct TraceEvent {
    std::size_t index = 0;
    Command command;
    MachineState before, after;
    double timestamp = 0; // start time, s

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct SimTrace {
    std::vector<TraceEvent> events;
    std::vector<std::string> warnings;
    double total_duration = 0;

    std::size_t exposures(std::string_view material) const;
    std::size_t clean_count() const;

    friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

// Thrown by execute at the first violation; carries the trace up to it.
class SimulationError : public Error {
public:
    SimulationError(Violation v, SimTrace partial);

    const Violation& violation() const { return violation_; }
    const SimTrace& partial_trace() const { return partial_; }

private:
    Violation violation_;
    SimTrace partial_;
};

// Runs the program against a three-station machine (pool A, pool B, cleaning
// pool). Stops at the first violation by throwing SimulationError.
SimTrace execute(const JobProgram& program, const ProcessParams& params);

// Static lint: every violation execute could raise, without stopping early.
std::vector<Violation> verify(const JobProgram& program);

// One event per line followed by a summary block.
std::string format_trace(const SimTrace& trace);

} // namespace mmdlp
