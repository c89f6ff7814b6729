#pragma once

#include "featcheck/vardsl/ast.hpp"
#include "featcheck/vardsl/compose.hpp"
#include "featcheck/vardsl/eval.hpp"
#include "featcheck/vardsl/parser.hpp"
#include "featcheck/vardsl/printer.hpp"
#include "featcheck/vardsl/prism.hpp"
#include "featcheck/vardsl/unfold.hpp"

namespace featcheck::vardsl {

/// Structural validation of a programmatically built model: the canonical
/// text form must parse cleanly. Returns diagnostics, empty when valid.
inline std::vector<std::string> validate_model(const ModelFile& model) {
    std::vector<std::string> out;
    try {
        parse_model(pretty_print(model));
    } catch (const std::exception& e) {
        out.push_back(e.what());
    }
    return out;
}

} // namespace featcheck::vardsl
