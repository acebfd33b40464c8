#pragma once

// Textual modelling language (`.ebm` files) and the project manifest.

#include <filesystem>
#include <string>
#include <vector>

#include "dse/kernel/check.hpp"
#include "dse/kernel/model.hpp"

namespace dse::surface {

struct SourceUnit {
  std::string path;
  std::string text;
};

struct Manifest {
  std::string root;
  std::vector<std::string> files;
};

struct ParseResult {
  kernel::Project project;
  std::vector<kernel::Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

// Parses, resolves and type-checks. `root` names the root machine; when
// empty, the last machine declared is used.
ParseResult parseProject(const std::vector<SourceUnit>& sources, const std::string& root = {});

// Throws kernel::DiagnosticError when parsing or checking fails.
kernel::Project parseProjectOrThrow(const std::vector<SourceUnit>& sources, const std::string& root = {});

// One unit per context and machine, in declaration order.
std::vector<SourceUnit> render(const kernel::Project& project);
std::string renderExpr(const kernel::Expr& e);
std::string renderType(const kernel::Type& t);

Manifest parseManifest(const std::string& text);
std::string renderManifest(const Manifest& m);

// Reads a manifest (or a directory holding project.toml) plus the sources it
// lists, relative to the manifest.
ParseResult loadProject(const std::filesystem::path& manifestPath);
std::vector<SourceUnit> readSources(const std::filesystem::path& manifestPath, Manifest& manifest);
kernel::Project loadProjectOrThrow(const std::filesystem::path& manifestPath);

// Writes rendered sources and a manifest into `dir`.
void saveProject(const kernel::Project& project, const std::filesystem::path& dir);

// "file:line:col: kind: message"
std::string formatDiagnostic(const kernel::Diagnostic& d, const std::vector<SourceUnit>& sources);

}  // namespace dse::surface
