#include "commonlibs/ingest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "commonlibs/errors.h"
#include "commonlibs/parallel.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace commonlibs {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("error while reading '" + path.string() + "'");
  }
  return std::move(buf).str();
}

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("error while writing '" + path.string() + "'");
  }
}

AppDescriptor load_app_from_smali_dir(const fs::path& root,
                                      const std::string& app_id,
                                      const SdkPrefixList& sdk,
                                      std::vector<std::string>* warnings) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw IoError("'" + root.string() + "' is not a directory");
  }
  AppDescriptor app;
  app.app_id = app_id;

  const auto smali_root = root / "smali";
  std::vector<fs::path> files;
  if (fs::is_directory(smali_root, ec)) {
    for (fs::recursive_directory_iterator it(smali_root, ec), end;
         it != end; it.increment(ec)) {
      if (ec) {
        throw IoError("cannot list '" + smali_root.string() +
                      "': " + ec.message());
      }
      if (it->is_regular_file() && it->path().extension() == ".smali") {
        files.push_back(it->path());
      }
    }
    if (ec) {
      throw IoError("cannot list '" + smali_root.string() +
                    "': " + ec.message());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ParseFailure> failures;
  std::set<std::string> class_names;
  for (const auto& file : files) {
    const auto text = read_file(file);
    const auto rel = fs::relative(file, smali_root).generic_string();
    ClassRecord cls;
    try {
      cls = parse_smali_class(text, rel, sdk);
    } catch (const ParseError& e) {
      failures.insert(failures.end(), e.failures().begin(),
                      e.failures().end());
      continue;
    }
    auto expected = cls.name;
    std::replace(expected.begin(), expected.end(), '.', '/');
    expected += ".smali";
    if (expected != rel && warnings != nullptr) {
      warnings->push_back(app_id + ": " + rel + " declares class " +
                          cls.name);
    }
    if (!class_names.insert(cls.name).second) {
      failures.push_back({rel, 1, "duplicate class '" + cls.name + "'"});
      continue;
    }
    app.classes.push_back(std::move(cls));
  }
  if (!failures.empty()) {
    throw ParseError(std::move(failures));
  }

  const auto manifest = root / "manifest.txt";
  if (fs::exists(manifest, ec)) {
    auto info = parse_manifest(read_file(manifest), manifest.string());
    app.permissions = std::move(info.permissions);
    app.components = std::move(info.components);
  }
  return app;
}

// ---------------------------------------------------------------------------
// Descriptor interchange format

namespace {

json to_json(const MethodRecord& m) {
  json body = json::array();
  for (const auto& insn : m.raw_body) {
    json j{{"op", insn.opcode}};
    if (insn.target) {
      j["target"] = insn.target->canonical();
    }
    body.push_back(std::move(j));
  }
  return json{{"signature", m.signature.canonical()},
              {"size_bytes", m.size_bytes},
              {"body", std::move(body)},
              {"abstract", m.abstract_body.tokens}};
}

json to_json(const ClassRecord& c) {
  json methods = json::array();
  for (const auto& m : c.methods) {
    methods.push_back(to_json(m));
  }
  return json{{"name", c.name},
              {"super", c.super_name ? json(*c.super_name) : json(nullptr)},
              {"size_bytes", c.size_bytes},
              {"methods", std::move(methods)}};
}

// Typed field access that reports the JSON path on failure.
class Reader {
 public:
  Reader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {}

  const json& required(const char* key, json::value_t type) const {
    auto it = node_.find(key);
    if (it == node_.end()) {
      throw FormatError(child(key), "missing required field");
    }
    check_type(*it, type, child(key));
    return *it;
  }

  const json* optional(const char* key, json::value_t type) const {
    auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) {
      return nullptr;
    }
    check_type(*it, type, child(key));
    return &*it;
  }

  std::string string(const char* key) const {
    return required(key, json::value_t::string).get<std::string>();
  }

  std::uint64_t count(const char* key) const {
    const auto& v = required(key, json::value_t::number_unsigned);
    return v.get<std::uint64_t>();
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  static void check_type(const json& v, json::value_t type,
                         const std::string& path) {
    bool ok = v.type() == type;
    // nlohmann stores non-negative literals as unsigned; accept either.
    if (type == json::value_t::number_unsigned &&
        v.type() == json::value_t::number_integer) {
      ok = v.get<std::int64_t>() >= 0;
    }
    if (!ok) {
      throw FormatError(path, std::string("expected ") + type_name(type) +
                            ", got " + v.type_name());
    }
  }

 private:
  static const char* type_name(json::value_t type) {
    switch (type) {
      case json::value_t::string: return "string";
      case json::value_t::array: return "array";
      case json::value_t::object: return "object";
      case json::value_t::number_unsigned: return "non-negative integer";
      default: return "value";
    }
  }

  const json& node_;
  std::string path_;
};

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

MethodSignature signature_at(const std::string& text, const std::string& path) {
  try {
    return MethodSignature::parse(text);
  } catch (const FormatError& e) {
    throw FormatError(path, e.what());
  }
}

MethodRecord method_from_json(const json& j, const std::string& path) {
  Reader::check_type(j, json::value_t::object, path);
  Reader r(j, path);
  MethodRecord m;
  m.signature = signature_at(r.string("signature"), r.child("signature"));
  m.size_bytes = r.count("size_bytes");
  const auto& body = r.required("body", json::value_t::array);
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto p = indexed(r.child("body"), i);
    Reader::check_type(body[i], json::value_t::object, p);
    Reader ir(body[i], p);
    Instruction insn;
    insn.opcode = ir.string("op");
    if (const auto* t = ir.optional("target", json::value_t::string)) {
      insn.target = signature_at(t->get<std::string>(), ir.child("target"));
    }
    m.raw_body.push_back(std::move(insn));
  }
  const auto& tokens = r.required("abstract", json::value_t::array);
  std::vector<std::string> abstract;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Reader::check_type(tokens[i], json::value_t::string,
                       indexed(r.child("abstract"), i));
    abstract.push_back(tokens[i].get<std::string>());
  }
  if (abstract.size() != m.raw_body.size()) {
    throw FormatError(r.child("abstract"),
                      "length differs from body length");
  }
  m.abstract_body = AbstractBody::from_tokens(std::move(abstract));
  return m;
}

ClassRecord class_from_json(const json& j, const std::string& path) {
  Reader::check_type(j, json::value_t::object, path);
  Reader r(j, path);
  ClassRecord c;
  c.name = r.string("name");
  if (const auto* s = r.optional("super", json::value_t::string)) {
    c.super_name = s->get<std::string>();
  }
  c.size_bytes = r.count("size_bytes");
  const auto& methods = r.required("methods", json::value_t::array);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto p = indexed(r.child("methods"), i);
    auto m = method_from_json(methods[i], p);
    if (m.signature.class_name != c.name) {
      throw FormatError(p + ".signature",
                        "method belongs to class '" +
                            m.signature.class_name + "'");
    }
    if (!seen.insert(m.signature.canonical()).second) {
      throw FormatError(p + ".signature", "duplicate method signature");
    }
    c.methods.push_back(std::move(m));
  }
  return c;
}

} // namespace

std::string save_descriptor(const AppDescriptor& app) {
  json components = json::array();
  for (const auto& c : app.components) {
    components.push_back(
        json{{"kind", std::string(to_string(c.kind))}, {"class", c.class_name}});
  }
  json classes = json::array();
  for (const auto& c : app.classes) {
    classes.push_back(to_json(c));
  }
  json doc{{"app_id", app.app_id},
           {"cert_id", app.cert_id ? json(*app.cert_id) : json(nullptr)},
           {"permissions", app.permissions},
           {"components", std::move(components)},
           {"classes", std::move(classes)},
           {"total_size_bytes", app.total_size_bytes()}};
  return doc.dump(1) + "\n";
}

AppDescriptor load_descriptor(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw FormatError("$", e.what());
  }
  Reader::check_type(doc, json::value_t::object, "$");
  Reader r(doc, "");
  AppDescriptor app;
  app.app_id = r.string("app_id");
  if (app.app_id.empty()) {
    throw FormatError("app_id", "must be non-empty");
  }
  if (const auto* cert = r.optional("cert_id", json::value_t::string)) {
    app.cert_id = cert->get<std::string>();
  }
  if (const auto* perms = r.optional("permissions", json::value_t::array)) {
    for (std::size_t i = 0; i < perms->size(); ++i) {
      Reader::check_type((*perms)[i], json::value_t::string,
                         indexed("permissions", i));
      app.permissions.insert((*perms)[i].get<std::string>());
    }
  }
  if (const auto* comps = r.optional("components", json::value_t::array)) {
    for (std::size_t i = 0; i < comps->size(); ++i) {
      const auto p = indexed("components", i);
      Reader::check_type((*comps)[i], json::value_t::object, p);
      Reader cr((*comps)[i], p);
      auto kind = component_kind_from_string(cr.string("kind"));
      if (!kind) {
        throw FormatError(cr.child("kind"), "unknown component kind");
      }
      app.components.push_back({*kind, cr.string("class")});
    }
  }
  const auto& classes = r.required("classes", json::value_t::array);
  std::set<std::string> names;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto p = indexed("classes", i);
    auto c = class_from_json(classes[i], p);
    if (!names.insert(c.name).second) {
      throw FormatError(p + ".name", "duplicate class '" + c.name + "'");
    }
    app.classes.push_back(std::move(c));
  }
  if (const auto* total =
          r.optional("total_size_bytes", json::value_t::number_unsigned)) {
    if (total->get<std::uint64_t>() != app.total_size_bytes()) {
      throw FormatError("total_size_bytes",
                        "does not equal the sum of class sizes");
    }
  }
  return app;
}

Corpus load_corpus_dir(const fs::path& dir, int workers) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<AppDescriptor> apps(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) {
    const auto text = read_file(files[i]);
    try {
      apps[i] = load_descriptor(text);
    } catch (const FormatError& e) {
      throw FormatError(e.field(), files[i].filename().string() + ": " +
                                       e.what());
    }
  });
  return Corpus(std::move(apps));
}

namespace {

std::string file_stem_for(const std::string& app_id) {
  std::string out = app_id;
  for (char& c : out) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
        (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    if (!keep) {
      c = '_';
    }
  }
  return out;
}

} // namespace

void save_corpus_dir(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  std::set<std::string> stems;
  for (const auto& app : corpus.apps()) {
    auto stem = file_stem_for(app.app_id);
    if (!stems.insert(stem).second) {
      throw IoError("app ids collide on file name '" + stem + ".json'");
    }
    write_file(dir / (stem + ".json"), save_descriptor(app));
  }
}

} // namespace commonlibs
