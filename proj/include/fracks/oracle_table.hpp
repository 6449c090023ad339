#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracks {

/// One row of the frozen extended-precision table: alpha, beta, x, E_{alpha,beta}(-x).
struct OracleRow {
    double alpha, beta, x, value;
    std::string value_text;
};

inline std::vector<OracleRow> load_ml_oracle(const std::string& path = FRACKS_DATA_DIR "/ml_oracle.tsv") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open oracle table " + path);
    std::vector<OracleRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        OracleRow r;
        is >> r.alpha >> r.beta >> r.x >> r.value_text;
        if (!is) throw std::runtime_error("bad oracle row: " + line);
        r.value = std::stod(r.value_text);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace fracks
