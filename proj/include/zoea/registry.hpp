#pragma once

// On-disk program registry: one subdirectory per program name holding the
// canonical program text and a small key:value metadata file. Persisted
// programs become callable instructions in later programs.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zoea/parser.hpp"
#include "zoea/vm.hpp"

namespace zoea {

struct RegistryError : std::runtime_error {
  explicit RegistryError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotFoundError : RegistryError {
  explicit NotFoundError(const std::string& name)
      : RegistryError("program '" + name + "' not found in registry") {}
};

struct RegistryEntry {
  std::string name;
  CompiledProgram compiled;
  TypeClass input_class = TypeClass::Any;
  TypeClass output_class = TypeClass::Any;
  std::string source_digest;
  std::int64_t created = 0;
};

// A stored program exposed to synthesis as a unary callable.
struct UseDescriptor {
  std::string name;
  TypeClass input_class = TypeClass::Any;
  TypeClass output_class = TypeClass::Any;
};

namespace registry_detail {

inline std::string percent_encode(const std::string& name) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : name) {
    bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                 (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (plain) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xf];
    }
  }
  return out;
}

inline std::string percent_decode(const std::string& enc) {
  std::string out;
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (enc[i] == '%' && i + 2 < enc.size()) {
      auto hexval = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
      };
      int hi = hexval(enc[i + 1]), lo = hexval(enc[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
        continue;
      }
    }
    out += enc[i];
  }
  return out;
}

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_hex(std::string_view data) {
  static const char* hex = "0123456789abcdef";
  std::uint64_t h = fnv1a(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

// Every Call target reachable from the program, fragments included.
inline void collect_call_targets(const CompiledProgram& p,
                                 std::vector<std::string>& out) {
  switch (p.kind()) {
    case CompiledProgram::Kind::Null:
      return;
    case CompiledProgram::Kind::Direct:
      for (const auto& n : p.nodes()) {
        if (n.kind == DagNode::Kind::Call) out.push_back(n.name);
        for (const auto& f : n.fragments) collect_call_targets(f, out);
      }
      return;
    case CompiledProgram::Kind::Conditional:
      for (const auto& [g, b] : p.branches()) {
        collect_call_targets(g, out);
        collect_call_targets(b, out);
      }
      if (const CompiledProgram* d = p.default_body())
        collect_call_targets(*d, out);
      return;
    case CompiledProgram::Kind::Recurrence:
      collect_call_targets(p.step(), out);
      return;
  }
}

// Scoped advisory lock on <root>/.lock; writers are exclusive.
class RootLock {
 public:
  explicit RootLock(const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    fd_ = ::open((root / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~RootLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  RootLock(const RootLock&) = delete;
  RootLock& operator=(const RootLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace registry_detail

inline std::vector<std::string> collect_call_targets(
    const CompiledProgram& p) {
  std::vector<std::string> out;
  registry_detail::collect_call_targets(p, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

class Registry : public ProgramResolver {
 public:
  explicit Registry(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  bool exists(const std::string& name) const {
    return std::filesystem::exists(dir_of(name) / "program.zvm");
  }

  // Re-storing an existing name overwrites (iterative development).
  void store(const RegistryEntry& entry) {
    for (const auto& target : collect_call_targets(entry.compiled))
      if (target != entry.name && !exists(target))
        throw RegistryError("dangling composition: program '" + entry.name +
                            "' calls unknown program '" + target + "'");
    registry_detail::RootLock lock(root_);
    std::filesystem::path dir = dir_of(entry.name);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw RegistryError("cannot create registry entry at " + dir.string());
    write_file(dir / "program.zvm", canonical_form(entry.compiled) + "\n");
    std::ostringstream meta;
    meta << "name: " << entry.name << "\n"
         << "input: " << type_class_name(entry.input_class) << "\n"
         << "output: " << type_class_name(entry.output_class) << "\n"
         << "digest: " << entry.source_digest << "\n"
         << "size: " << program_size(entry.compiled) << "\n"
         << "created: " << entry.created << "\n";
    write_file(dir / "meta", meta.str());
    std::lock_guard<std::mutex> g(mu_);
    cache_.erase(entry.name);
  }

  RegistryEntry load(const std::string& name) const {
    std::filesystem::path dir = dir_of(name);
    std::optional<std::string> text = read_file(dir / "program.zvm");
    if (!text) throw NotFoundError(name);
    RegistryEntry entry;
    entry.name = name;
    entry.compiled = parse_canonical_program(*text);
    if (auto meta = read_file(dir / "meta")) {
      std::istringstream in(*meta);
      std::string line;
      while (std::getline(in, line)) {
        auto colon = line.find(": ");
        if (colon == std::string::npos) continue;
        std::string key = line.substr(0, colon);
        std::string val = line.substr(colon + 2);
        if (key == "input") {
          if (auto t = type_class_from_name(val)) entry.input_class = *t;
        } else if (key == "output") {
          if (auto t = type_class_from_name(val)) entry.output_class = *t;
        } else if (key == "digest") {
          entry.source_digest = val;
        } else if (key == "created") {
          entry.created = std::atoll(val.c_str());
        }
      }
    }
    return entry;
  }

  // Deterministic listing, sorted by name.
  std::vector<std::string> list() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(root_, ec)) {
      if (!e.is_directory()) continue;
      if (std::filesystem::exists(e.path() / "program.zvm"))
        out.push_back(
            registry_detail::percent_decode(e.path().filename().string()));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // One callable descriptor per used program; missing names fail before
  // search begins.
  std::vector<UseDescriptor> resolve_uses(const NormalizedSpec& spec) const {
    std::vector<std::string> missing;
    std::vector<UseDescriptor> out;
    for (const auto& name : spec.uses) {
      if (!exists(name)) {
        missing.push_back(name);
        continue;
      }
      RegistryEntry e = load(name);
      out.push_back({name, e.input_class, e.output_class});
    }
    if (!missing.empty()) {
      std::string msg = "unknown used program(s):";
      for (const auto& m : missing) msg += " '" + m + "'";
      throw RegistryError(msg);
    }
    return out;
  }

  // ProgramResolver: cached reads so composed programs execute quickly.
  const CompiledProgram* find(const std::string& name) const override {
    std::lock_guard<std::mutex> g(mu_);
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second ? &*it->second : nullptr;
    std::optional<std::string> text = read_file(dir_of(name) / "program.zvm");
    if (!text) {
      cache_.emplace(name, std::nullopt);
      return nullptr;
    }
    auto [pos, inserted] =
        cache_.emplace(name, parse_canonical_program(*text));
    return &*pos->second;
  }

 private:
  std::filesystem::path dir_of(const std::string& name) const {
    return root_ / registry_detail::percent_encode(name);
  }

  static void write_file(const std::filesystem::path& path,
                         const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RegistryError("cannot write " + path.string());
    out << content;
    if (!out.good()) throw RegistryError("write failed for " + path.string());
  }

  static std::optional<std::string> read_file(
      const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::optional<CompiledProgram>> cache_;
};

inline std::string source_digest(std::string_view source) {
  return registry_detail::digest_hex(source);
}

}  // namespace zoea
