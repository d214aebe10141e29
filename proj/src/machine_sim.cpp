#include "mmdlp/machine_sim.hpp"

#include <fmt/format.h>

namespace mmdlp {

std::string_view to_string(Position p)
{
    switch (p) {
    case Position::A: return "A";
    case Position::B: return "B";
    case Position::Clean: return "CLEAN";
    case Position::InTransit: return "TRANSIT";
    }
    return "?";
}

std::string_view to_string(ViolationKind k)
{
    switch (k) {
    case ViolationKind::ExposeOffStation: return "ExposeOffStation";
    case ViolationKind::PoolMismatch: return "PoolMismatch";
    case ViolationKind::Contamination: return "Contamination";
    case ViolationKind::NonMonotonicZ: return "NonMonotonicZ";
    case ViolationKind::MissingHome: return "MissingHome";
    case ViolationKind::MissingEnd: return "MissingEnd";
    case ViolationKind::UnknownCommand: return "UnknownCommand";
    case ViolationKind::UnknownMaterial: return "UnknownMaterial";
    case ViolationKind::CleanOffStation: return "CleanOffStation";
    case ViolationKind::CommandAfterEnd: return "CommandAfterEnd";
    }
    return "?";
}

std::size_t SimTrace::exposures(std::string_view material) const
{
    std::size_t n = 0;
    for (const auto& e : events)
        n += e.command.kind == CommandKind::Expose && e.command.material == material;
    return n;
}

std::size_t SimTrace::clean_count() const
{
    std::size_t n = 0;
    for (const auto& e : events)
        n += e.command.kind == CommandKind::Clean;
    return n;
}

SimulationError::SimulationError(Violation v, SimTrace partial)
    : Error(ErrorCode::SimulationViolation,
            fmt::format("{} at command {}: {}", to_string(v.kind), v.command_index, v.message)),
      violation_(std::move(v)), partial_(std::move(partial))
{
}

namespace {

Position position_of(Station s)
{
    switch (s) {
    case Station::A: return Position::A;
    case Station::B: return Position::B;
    case Station::Clean: return Position::Clean;
    }
    return Position::InTransit;
}

std::optional<Pool> pool_at(Position p)
{
    if (p == Position::A)
        return Pool::A;
    if (p == Position::B)
        return Pool::B;
    return std::nullopt;
}

// The interpreter core shared by execute (timed, stop on first violation) and
// verify (untimed, collect everything).
class Machine {
public:
    Machine(const JobProgram& program, const ProcessParams* params) : program_(program), params_(params) {}

    // Applies command i. Returns the violation it raises, if any. State
    // effects are applied even on a violation so a lint pass can continue.
    std::optional<Violation> step(std::size_t i, std::vector<std::string>& warnings)
    {
        const Command& c = program_.commands[i];
        auto violation = [&](ViolationKind k, std::string msg) { return Violation{k, i, std::move(msg)}; };

        if (i == 0 && c.kind != CommandKind::Home)
            return violation(ViolationKind::MissingHome, "program must begin with HOME");
        if (ended_)
            return violation(ViolationKind::CommandAfterEnd, c.to_line());

        double dt = 0;
        std::optional<Violation> v;
        switch (c.kind) {
        case CommandKind::Home:
            state_.position = Position::InTransit;
            state_.z_e4 = 0;
            break;
        case CommandKind::End: ended_ = true; break;
        case CommandKind::Pool: {
            const Position target = position_of(c.station);
            if (target == state_.position)
                warnings.push_back(fmt::format("command {}: redundant POOL {}", i, to_string(c.station)));
            const auto p = pool_at(target);
            if (p && state_.last_exposed_pool && *state_.last_exposed_pool != *p && !state_.cleaned_since_exposure)
                state_.contaminated = true;
            state_.position = target;
            if (params_)
                dt = params_->xy_travel_s;
            break;
        }
        case CommandKind::Z:
            if (c.z_e4 < state_.z_e4)
                v = violation(ViolationKind::NonMonotonicZ,
                              fmt::format("Z {} below current {}", c.to_line(), state_.z_e4 / 1e4));
            if (params_ && c.z_e4 > state_.z_e4)
                dt = static_cast<double>(c.z_e4 - state_.z_e4) / 1e4 / params_->z_speed_mm_s;
            state_.z_e4 = std::max(state_.z_e4, c.z_e4);
            break;
        case CommandKind::Expose: {
            const auto here = pool_at(state_.position);
            const auto pool = program_.header.pools.find(c.material);
            if (!here)
                v = violation(ViolationKind::ExposeOffStation,
                              fmt::format("EXPOSE while at {}", to_string(state_.position)));
            else if (pool == program_.header.pools.end())
                v = violation(ViolationKind::UnknownMaterial, fmt::format("material '{}'", c.material));
            else if (pool->second != *here)
                v = violation(ViolationKind::PoolMismatch,
                              fmt::format("material '{}' lives in pool {} but platform is at {}", c.material,
                                          to_string(pool->second), to_string(state_.position)));
            else if (state_.contaminated)
                v = violation(ViolationKind::Contamination,
                              fmt::format("pool {} entered without cleaning after pool {}", to_string(*here),
                                          to_string(*state_.last_exposed_pool)));
            if (!v) {
                if (state_.z_e4 == 0)
                    warnings.push_back(fmt::format("command {}: exposure at z = 0", i));
                state_.last_exposed_pool = *here;
                state_.cleaned_since_exposure = false;
                ++state_.cured_layers[c.material];
            }
            if (params_)
                dt = static_cast<double>(c.ms) / 1000.0 + 2.0 * params_->lift_mm / params_->z_speed_mm_s;
            break;
        }
        case CommandKind::Clean:
            if (state_.position != Position::Clean) {
                v = violation(ViolationKind::CleanOffStation,
                              fmt::format("CLEAN while at {}", to_string(state_.position)));
            } else {
                state_.contaminated = false;
                state_.cleaned_since_exposure = true;
            }
            dt = static_cast<double>(c.ms) / 1000.0;
            break;
        case CommandKind::Dry:
            if (i == 0 || program_.commands[i - 1].kind != CommandKind::Clean)
                warnings.push_back(fmt::format("command {}: DRY without preceding CLEAN", i));
            dt = static_cast<double>(c.ms) / 1000.0;
            break;
        case CommandKind::Unknown: v = violation(ViolationKind::UnknownCommand, c.text); break;
        }
        if (params_)
            state_.elapsed += dt;
        return v;
    }

    std::optional<Violation> finish() const
    {
        if (!ended_)
            return Violation{ViolationKind::MissingEnd, program_.commands.size(), "program must end with END"};
        return std::nullopt;
    }

    const MachineState& state() const { return state_; }

private:
    const JobProgram& program_;
    const ProcessParams* params_;
    MachineState state_;
    bool ended_ = false;
};

} // namespace

SimTrace execute(const JobProgram& program, const ProcessParams& params)
{
    SimTrace trace;
    Machine m(program, &params);
    if (program.commands.empty())
        throw SimulationError({ViolationKind::MissingHome, 0, "empty program"}, trace);
    for (std::size_t i = 0; i < program.commands.size(); ++i) {
        TraceEvent ev;
        ev.index = i;
        ev.command = program.commands[i];
        ev.before = m.state();
        ev.timestamp = m.state().elapsed;
        if (auto v = m.step(i, trace.warnings)) {
            trace.total_duration = m.state().elapsed;
            throw SimulationError(std::move(*v), std::move(trace));
        }
        ev.after = m.state();
        trace.events.push_back(std::move(ev));
    }
    trace.total_duration = m.state().elapsed;
    if (auto v = m.finish())
        throw SimulationError(std::move(*v), std::move(trace));
    return trace;
}

std::vector<Violation> verify(const JobProgram& program)
{
    std::vector<Violation> out;
    std::vector<std::string> warnings;
    Machine m(program, nullptr);
    if (program.commands.empty())
        return {{ViolationKind::MissingHome, 0, "empty program"}, {ViolationKind::MissingEnd, 0, "empty program"}};
    for (std::size_t i = 0; i < program.commands.size(); ++i)
        if (auto v = m.step(i, warnings))
            out.push_back(std::move(*v));
    if (auto v = m.finish())
        out.push_back(std::move(*v));
    return out;
}

std::string format_trace(const SimTrace& trace)
{
    std::string out = fmt::format("# trace events={}\n", trace.events.size());
    for (const auto& e : trace.events) {
        out += fmt::format("{:06} t={:.6f} {} | pos={} z={:.4f} contaminated={} elapsed={:.6f}\n", e.index,
                           e.timestamp, e.command.to_line(), to_string(e.after.position),
                           static_cast<double>(e.after.z_e4) / 1e4, e.after.contaminated ? 1 : 0, e.after.elapsed);
    }
    out += "# summary\n";
    out += fmt::format("total_s={:.9f}\n", trace.total_duration);
    std::map<std::string, std::size_t> per_material;
    for (const auto& e : trace.events)
        if (e.command.kind == CommandKind::Expose)
            ++per_material[e.command.material];
    for (const auto& [m, n] : per_material)
        out += fmt::format("exposures.{}={}\n", m, n);
    out += fmt::format("clean_count={}\n", trace.clean_count());
    out += fmt::format("warnings={}\n", trace.warnings.size());
    for (const auto& w : trace.warnings)
        out += "warning: " + w + "\n";
    return out;
}

} // namespace mmdlp
