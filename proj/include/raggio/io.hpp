#pragma once

#include <string>

#include <json.hpp>

#include "raggio/bell.hpp"
#include "raggio/entanglement.hpp"
#include "raggio/harness.hpp"

namespace raggio::io {

using Json = nlohmann::json;

// Complex numbers are [re, im] pairs; matrices are row-major lists of them.

/// { "block_dims": [...], "shorthand": "...", "factors": [A, B] }; factors only
/// for tensor products.
Json to_json(const FdAlgebra& a);
/// Accepts the object form or a shorthand string such as "M2xD2".
FdAlgebra algebra_from_json(const Json& j);

/// { "blocks": [ { "dim": n, "entries": [[re, im], ...] } ] }.
Json to_json(const Element& x);
/// The owner is the "algebra" member when present, otherwise the block dims.
Element element_from_json(const Json& j, const FdAlgebra* owner = nullptr);

/// { "algebra": {...}, "entries": [[re, im], ...] } with the full row-major
/// total_dim x total_dim density matrix.
Json to_json(const State& s);
State state_from_json(const Json& j);

/// { "psi": [[re, im], ...] } plus "algebra" (defaults to M_n).
Json to_json(const PureVector& v);
PureVector pure_vector_from_json(const Json& j, bool normalize = false);

/// { "weights": [...], "a_parts": [state...], "b_parts": [state...] }.
Json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const Json& j);

/// { "tag": "...", "certificate": {...} }.
Json to_json(const SeparabilityVerdict& v);

/// { "value", "observables": { "a1", "a2", "b1", "b2" }, "restarts", "iterations", "converged" }.
Json to_json(const ChshResult& r);

/// RaggioReport with "schema": 1.
Json to_json(const RaggioReport& r);

/// Throws Parse for unreadable files or malformed JSON.
Json read_json_file(const std::string& path);
Json parse_json(const std::string& text);

}  // namespace raggio::io
