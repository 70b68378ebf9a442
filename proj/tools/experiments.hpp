#pragma once

// Experiment drivers behind the opsplit command-line tool. Each command
// returns a table plus the hard checks it evaluated; the caller decides
// where the table goes and turns the checks into an exit status.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "opsplit/opsplit.hpp"

namespace opsplit::cli {

enum class Experiment { example1, transport, orders, quadcheck };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& s);

struct ExperimentConfig {
    Experiment experiment = Experiment::example1;
    std::vector<std::string> schemes{"lie", "swss", "strang", "iterative"};
    std::vector<IterationMode> modes{IterationMode::one_sided_a, IterationMode::one_sided_b,
                                     IterationMode::alternating};
    // Empty means the experiment's default list.
    std::vector<double> dts;
    // 0 means the experiment's default cap.
    int iters = 0;
    double t_end = 1.0;
    TransportConfig transport;
    MemoryKind closure = MemoryKind::case1_moment;
    std::string history_quad = "simpson";
    int history_panels = 8;
    int refinement = 16;
    std::uint64_t seed = 42;
    std::string out;

    void validate() const;
    std::vector<double> effective_dts() const;
    int effective_iters() const;
};

// Fills `cfg` from a JSON document; absent fields keep their values.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);

// FNV-1a of the canonical JSON dump of the effective configuration.
std::string config_hash(const ExperimentConfig& cfg);

using Cell = std::variant<std::string, long long, double>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult {
    Table table;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool all_passed() const;
};

ExperimentResult cmd_example1(const ExperimentConfig& cfg);
ExperimentResult cmd_transport(const ExperimentConfig& cfg);
ExperimentResult cmd_orders(const ExperimentConfig& cfg);
ExperimentResult cmd_quadcheck(const ExperimentConfig& cfg);
ExperimentResult run(const ExperimentConfig& cfg);

// Scientific notation, six significant digits, '.' decimal point.
std::string format_number(double x);

void write_csv(std::ostream& os, const Table& t);
// Whitespace-separated blocks, one per distinct first-column value,
// separated by two blank lines.
void write_gnuplot(std::ostream& os, const Table& t);

} // namespace opsplit::cli
