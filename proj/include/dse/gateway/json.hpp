#pragma once

// JSON forms of the workbench's data: expressions, values, traces, tables,
// flaw and analysis reports. Objects keep insertion order.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dse/animator/animator.hpp"
#include "dse/forge/forge.hpp"
#include "dse/former/former.hpp"
#include "dse/kernel/check.hpp"
#include "dse/kernel/diff.hpp"
#include "dse/surface/surface.hpp"

namespace dse::json {

using Json = nlohmann::ordered_json;

class BadDocument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json toJson(const kernel::Expr& e);
kernel::Expr exprFromJson(const Json& j);

Json toJson(const kernel::Type& t);
kernel::Type typeFromJson(const Json& j);

// Integers and booleans map to JSON scalars, atoms to strings, sets to arrays
// and pairs to {"pair": [a, b]}.
Json toJson(const animator::Value& v);
animator::Value valueFromJson(const Json& j);

Json toJson(const animator::State& s);
animator::State stateFromJson(const Json& j);

// {"event": name, "binding": {param: value, ...}}
Json toJson(const animator::EventInstance& e);
animator::EventInstance instanceFromJson(const Json& j);
std::vector<animator::EventInstance> scheduleFromJson(const Json& j);

Json toJson(const animator::Trace& t);
animator::Trace traceFromJson(const Json& j);

Json toJson(const animator::FlawReport& r);
animator::FlawReport flawReportFromJson(const Json& j);

Json toJson(const Table& t);
Table tableFromJson(const Json& j);
Json toJson(const TableBundle& b);
TableBundle bundleFromJson(const Json& j);

Json toJson(const former::Conjecture& c);
former::Conjecture conjectureFromJson(const Json& j);

Json toJson(const former::AnalysisReport& r);
former::AnalysisReport analysisFromJson(const Json& j);

Json toJson(const kernel::Span& s);
Json toJson(const kernel::Diagnostic& d);
Json toJson(const kernel::EditScript& script);

// {"root": name, "files": [{"path", "text"}]}
Json toJson(const std::vector<surface::SourceUnit>& units, const std::string& root);
std::vector<surface::SourceUnit> sourcesFromJson(const Json& j);

Json toJson(const forge::ProvenanceStep& s);
Json toJson(const forge::Focus& f);
forge::Focus focusFromJson(const Json& j);

// Reads a JSON file, throwing BadDocument on syntax errors.
Json readFile(const std::string& path);
void writeFile(const std::string& path, const Json& j);

}  // namespace dse::json
