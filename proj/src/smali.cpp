#include <algorithm>
#include <set>
#include <stdexcept>

#include "commonlibs/errors.h"
#include "commonlibs/ingest.h"

namespace commonlibs {

namespace {

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  auto begin = s.find_first_not_of(kWhitespace);
  if (begin == std::string_view::npos) {
    return {};
  }
  auto end = s.find_last_not_of(kWhitespace);
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    auto begin = line.find_first_not_of(kWhitespace, pos);
    if (begin == std::string_view::npos) {
      break;
    }
    auto end = line.find_first_of(kWhitespace, begin);
    if (end == std::string_view::npos) {
      end = line.size();
    }
    out.push_back(line.substr(begin, end - begin));
    pos = end;
  }
  return out;
}

// Consumes one type descriptor from the front of `s`.
std::string take_type(std::string_view& s) {
  std::size_t dims = 0;
  while (!s.empty() && s.front() == '[') {
    ++dims;
    s.remove_prefix(1);
  }
  if (s.empty()) {
    throw std::invalid_argument("truncated type descriptor");
  }
  std::string name;
  switch (s.front()) {
    case 'V': name = "void"; break;
    case 'Z': name = "boolean"; break;
    case 'B': name = "byte"; break;
    case 'S': name = "short"; break;
    case 'C': name = "char"; break;
    case 'I': name = "int"; break;
    case 'J': name = "long"; break;
    case 'F': name = "float"; break;
    case 'D': name = "double"; break;
    case 'L': {
      auto semi = s.find(';');
      if (semi == std::string_view::npos || semi == 1) {
        throw std::invalid_argument("unterminated class descriptor");
      }
      name = std::string(s.substr(1, semi - 1));
      for (char& c : name) {
        if (c == '/') {
          c = '.';
        } else if (c == '.' || c == '(' || c == ')' || c == ';') {
          throw std::invalid_argument("invalid character in class descriptor");
        }
      }
      if (name.front() == '.' || name.back() == '.' ||
          name.find("..") != std::string::npos) {
        throw std::invalid_argument("empty segment in class descriptor");
      }
      s.remove_prefix(semi + 1);
      for (std::size_t i = 0; i < dims; ++i) {
        name += "[]";
      }
      return name;
    }
    default:
      throw std::invalid_argument(std::string("unknown type descriptor '") +
                                  s.front() + "'");
  }
  s.remove_prefix(1);
  for (std::size_t i = 0; i < dims; ++i) {
    name += "[]";
  }
  return name;
}

struct Prototype {
  std::string name;
  std::vector<std::string> params;
  std::string ret;
};

// "name(args)ret"
Prototype parse_prototype(std::string_view s) {
  auto open = s.find('(');
  if (open == std::string_view::npos || open == 0) {
    throw std::invalid_argument("missing method name or parameter list");
  }
  Prototype proto;
  proto.name = std::string(s.substr(0, open));
  s.remove_prefix(open + 1);
  while (!s.empty() && s.front() != ')') {
    proto.params.push_back(take_type(s));
  }
  if (s.empty()) {
    throw std::invalid_argument("unterminated parameter list");
  }
  s.remove_prefix(1);
  proto.ret = take_type(s);
  if (!s.empty()) {
    throw std::invalid_argument("trailing characters after return type");
  }
  return proto;
}

// Directives that open a block whose body is data, not code.
bool opens_data_block(std::string_view directive) {
  return directive == ".annotation" || directive == ".subannotation" ||
      directive == ".packed-switch" || directive == ".sparse-switch" ||
      directive == ".array-data";
}

struct PendingMethod {
  int line = 0;
  std::size_t offset = 0;
  Prototype proto;
  std::vector<Instruction> body;
};

} // namespace

std::string type_name_from_descriptor(std::string_view descriptor) {
  auto rest = descriptor;
  auto name = take_type(rest);
  if (!rest.empty()) {
    throw std::invalid_argument("trailing characters after type descriptor");
  }
  return name;
}

MethodSignature parse_method_reference(std::string_view ref) {
  auto arrow = ref.find("->");
  if (arrow == std::string_view::npos) {
    throw std::invalid_argument("missing '->' in method reference");
  }
  MethodSignature sig;
  sig.class_name = type_name_from_descriptor(ref.substr(0, arrow));
  auto proto = parse_prototype(ref.substr(arrow + 2));
  sig.method_name = std::move(proto.name);
  sig.param_types = std::move(proto.params);
  sig.return_type = std::move(proto.ret);
  return sig;
}

ClassRecord parse_smali_class(std::string_view text, std::string_view path,
                              const SdkPrefixList& sdk) {
  ClassRecord record;
  record.size_bytes = text.size();
  bool have_class = false;
  std::optional<PendingMethod> method;
  std::vector<std::string> open_blocks;
  std::vector<std::pair<int, MethodRecord>> methods;

  auto fail = [&](int line, const std::string& message) {
    return ParseError(std::string(path), line, message);
  };

  std::size_t offset = 0;
  int line_no = 0;
  while (offset < text.size()) {
    ++line_no;
    auto newline = text.find('\n', offset);
    auto next = newline == std::string_view::npos ? text.size() : newline + 1;
    auto line = trim(text.substr(offset, next - offset));
    const auto line_offset = offset;
    offset = next;

    if (line.empty() || line.front() == '#') {
      continue;
    }
    auto toks = tokens_of(line);
    const auto head = toks.front();

    if (head.front() == '.') {
      if (head == ".end") {
        if (toks.size() < 2) {
          throw fail(line_no, "'.end' without a directive name");
        }
        auto what = toks[1];
        if (what == "method") {
          if (!method) {
            throw fail(line_no, "'.end method' without '.method'");
          }
          if (!open_blocks.empty()) {
            throw fail(line_no, "unterminated '" + open_blocks.back() +
                                    "' block in method");
          }
          MethodRecord m;
          m.signature.method_name = std::move(method->proto.name);
          m.signature.param_types = std::move(method->proto.params);
          m.signature.return_type = std::move(method->proto.ret);
          m.abstract_body = abstract_method(method->body, sdk);
          m.raw_body = std::move(method->body);
          m.size_bytes = next - method->offset;
          methods.emplace_back(method->line, std::move(m));
          method.reset();
        } else if (!open_blocks.empty() &&
                   open_blocks.back() == "." + std::string(what)) {
          open_blocks.pop_back();
        }
        continue;
      }
      if (!open_blocks.empty()) {
        if (opens_data_block(head)) {
          open_blocks.emplace_back(head);
        }
        continue;
      }
      if (head == ".class") {
        if (have_class) {
          throw fail(line_no, "duplicate '.class' directive");
        }
        if (toks.size() < 2 || toks.back().front() != 'L') {
          throw fail(line_no, "'.class' requires a class descriptor");
        }
        try {
          record.name = type_name_from_descriptor(toks.back());
        } catch (const std::invalid_argument& e) {
          throw fail(line_no, e.what());
        }
        have_class = true;
      } else if (head == ".super") {
        if (toks.size() < 2) {
          throw fail(line_no, "'.super' requires a class descriptor");
        }
        try {
          record.super_name = type_name_from_descriptor(toks.back());
        } catch (const std::invalid_argument& e) {
          throw fail(line_no, e.what());
        }
      } else if (head == ".method") {
        if (method) {
          throw fail(method->line, "unterminated '.method'");
        }
        if (toks.size() < 2) {
          throw fail(line_no, "'.method' requires a prototype");
        }
        PendingMethod pending;
        pending.line = line_no;
        pending.offset = line_offset;
        try {
          pending.proto = parse_prototype(toks.back());
        } catch (const std::invalid_argument& e) {
          throw fail(line_no, e.what());
        }
        method = std::move(pending);
      } else if (opens_data_block(head)) {
        open_blocks.emplace_back(head);
      }
      continue;
    }

    if (!open_blocks.empty() || head.front() == ':') {
      continue;
    }
    if (!method) {
      throw fail(line_no, "instruction outside of a method");
    }
    Instruction insn;
    insn.opcode = std::string(head);
    if (insn.opcode.starts_with("invoke")) {
      auto ref = std::find_if(toks.begin() + 1, toks.end(), [](auto t) {
        return t.find("->") != std::string_view::npos;
      });
      if (ref != toks.end()) {
        auto target = *ref;
        if (target.ends_with(',')) {
          target.remove_suffix(1);
        }
        try {
          insn.target = parse_method_reference(target);
        } catch (const std::invalid_argument& e) {
          throw fail(line_no, std::string("malformed method reference: ") +
                                  e.what());
        }
      } else if (insn.opcode != "invoke-custom" &&
                 insn.opcode != "invoke-custom/range") {
        throw fail(line_no, "invoke without a method reference");
      }
    }
    method->body.push_back(std::move(insn));
  }

  if (!have_class) {
    throw fail(1, "missing '.class' directive");
  }
  if (method) {
    throw fail(method->line, "unterminated '.method'");
  }

  std::set<std::string> seen;
  for (auto& [line, m] : methods) {
    m.signature.class_name = record.name;
    if (!seen.insert(m.signature.canonical()).second) {
      throw fail(line, "duplicate method '" + m.signature.canonical() + "'");
    }
    record.methods.push_back(std::move(m));
  }
  return record;
}

ManifestInfo parse_manifest(std::string_view text, std::string_view path) {
  ManifestInfo info;
  std::size_t offset = 0;
  int line_no = 0;
  while (offset < text.size()) {
    ++line_no;
    auto newline = text.find('\n', offset);
    auto next = newline == std::string_view::npos ? text.size() : newline + 1;
    auto line = trim(text.substr(offset, next - offset));
    offset = next;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    auto toks = tokens_of(line);
    if (toks[0] == "permission" && toks.size() == 2) {
      info.permissions.emplace(toks[1]);
    } else if (toks[0] == "component" && toks.size() == 3) {
      auto kind = component_kind_from_string(toks[1]);
      if (!kind) {
        throw ParseError(std::string(path), line_no,
                         "unknown component kind '" + std::string(toks[1]) +
                             "'");
      }
      info.components.push_back({*kind, std::string(toks[2])});
    } else {
      throw ParseError(std::string(path), line_no,
                       "expected 'permission <name>' or "
                       "'component <kind> <class>'");
    }
  }
  return info;
}

} // namespace commonlibs
