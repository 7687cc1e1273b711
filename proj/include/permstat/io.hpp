#pragma once

// Table ingestion and result serialization for the CLI.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "permstat/effectsize.hpp"
#include "permstat/reference.hpp"
#include "permstat/types.hpp"

namespace permstat::io {

enum class TableLayout { Wide, Long };

struct TableSpec {
    std::string path;
    TableLayout layout = TableLayout::Wide;
    char delimiter = '\0';  // '\0' = auto-detect (tab, comma, semicolon, space)
    bool header = true;
    std::string value_column;                 // Long layout
    std::vector<std::string> group_columns;   // Long layout: 1 or 2 factor columns
};

struct WideTable {
    DataMatrix data;
    std::vector<std::string> column_names;
};

struct LongTable {
    std::vector<double> values;
    std::vector<int> group_a;
    std::vector<int> group_b;                // empty unless two factor columns
    std::vector<std::string> levels_a;       // dense code -> label
    std::vector<std::string> levels_b;
};

WideTable load_wide(const TableSpec& spec);
LongTable load_long(const TableSpec& spec);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

nlohmann::json result_to_json(const PermutationResult& res,
                              const std::vector<std::string>& variable_names,
                              bool include_dists);
nlohmann::json effect_to_json(const EffectSizeResult& res,
                              const std::vector<std::string>& variable_names);
nlohmann::json fwer_to_json(const reference::FwerReport& report, std::uint64_t seed,
                            std::uint64_t n_perm);

std::string result_to_csv(const PermutationResult& res,
                          const std::vector<std::string>& variable_names);
std::string effect_to_csv(const EffectSizeResult& res,
                          const std::vector<std::string>& variable_names);

// Tab-separated per-variable plot data; the first line documents the column
// order. Byte-stable for fixed inputs and seed.
void emit_plot_data(const PermutationResult& res, std::ostream& out);
void emit_plot_data(const EffectSizeResult& res, std::ostream& out);

}  // namespace permstat::io
