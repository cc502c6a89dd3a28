#pragma once

#include "qparity/io.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace qparity::testing {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Model load_model(const std::string& name) {
    return parse_model(slurp(std::string(QPARITY_MODELS_DIR) + "/" + name));
}

inline Model recharge() { return load_model("recharge.mdp"); }
inline Model drain() { return load_model("drain.mdp"); }
inline Model drain_game() { return load_model("drain_gadget.game"); }

} // namespace qparity::testing
