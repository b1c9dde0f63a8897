#include "test_support.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace testing_support {

namespace fs = std::filesystem;

fs::path fixture_dir() { return REVEVAL_FIXTURE_DIR; }
fs::path data_dir() { return REVEVAL_DATA_DIR; }
fs::path stub_adapter() { return REVEVAL_STUB_ADAPTER; }
fs::path reveval_binary() { return REVEVAL_CLI_BINARY; }
fs::path docs_dir() { return REVEVAL_DOCS_DIR; }

std::string stub_command(const std::string& flags) {
  std::string cmd = "'" + stub_adapter().string() + "'";
  if (!flags.empty()) cmd += " " + flags;
  return cmd;
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "reveval-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> text_paragraphs() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(data_dir() / "text")) {
    if (e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) {
    std::istringstream in(slurp(f));
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(line);
    }
  }
  return out;
}

std::vector<reveval::Document> documents_from_paragraphs(const std::vector<std::string>& paragraphs,
                                                         std::size_t per_doc) {
  std::vector<reveval::Document> docs;
  for (std::size_t i = 0; i < paragraphs.size(); i += per_doc) {
    reveval::Document d;
    char id[16];
    std::snprintf(id, sizeof id, "T%04zu", docs.size());
    d.id = id;
    d.editor = "corpus";
    reveval::Section sec;
    sec.kind = reveval::SectionKind::Abstract;
    std::string body;
    for (std::size_t j = i; j < std::min(paragraphs.size(), i + per_doc); ++j) {
      if (!body.empty()) body += "\n\n";
      body += paragraphs[j];
    }
    sec.nodes.emplace_back(reveval::TextNode{body});
    d.sections.push_back(std::move(sec));
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace testing_support
