#include "support.hpp"

#include <cctype>
#include <cstring>

namespace testsupport {

namespace {

struct Scanner {
  const std::string& s;
  std::size_t pos = 0;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  bool starts_with(const char* prefix) const { return s.compare(pos, std::strlen(prefix), prefix) == 0; }
};

}  // namespace

bool xml_well_formed(const std::string& content) {
  Scanner sc{content};
  std::vector<std::string> stack;
  bool saw_root = false;

  while (!sc.eof()) {
    if (sc.peek() != '<') {
      ++sc.pos;
      continue;
    }
    if (sc.starts_with("<?")) {  // declaration / processing instruction
      const auto end = content.find("?>", sc.pos);
      if (end == std::string::npos) return false;
      sc.pos = end + 2;
      continue;
    }
    if (sc.starts_with("<!--")) {
      const auto end = content.find("-->", sc.pos);
      if (end == std::string::npos) return false;
      sc.pos = end + 3;
      continue;
    }
    const bool closing = sc.starts_with("</");
    sc.pos += closing ? 2 : 1;
    std::string name;
    while (!sc.eof() && (std::isalnum(static_cast<unsigned char>(sc.peek())) || sc.peek() == ':' ||
                         sc.peek() == '-' || sc.peek() == '_')) {
      name += sc.peek();
      ++sc.pos;
    }
    if (name.empty()) return false;

    // Scan attributes; values must be double-quoted.
    bool self_closing = false;
    while (!sc.eof() && sc.peek() != '>') {
      if (sc.peek() == '"') {
        const auto end = content.find('"', sc.pos + 1);
        if (end == std::string::npos) return false;
        sc.pos = end + 1;
        continue;
      }
      if (sc.peek() == '/' && sc.pos + 1 < content.size() && content[sc.pos + 1] == '>') {
        self_closing = true;
        ++sc.pos;
        break;
      }
      if (sc.peek() == '<') return false;
      ++sc.pos;
    }
    if (sc.eof()) return false;
    ++sc.pos;  // consume '>'

    if (closing) {
      if (self_closing || stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty() && saw_root) return false;  // second root
      stack.push_back(name);
      saw_root = true;
    } else if (stack.empty()) {
      if (saw_root) return false;
      saw_root = true;
    }
  }
  return stack.empty() && saw_root;
}

}  // namespace testsupport
