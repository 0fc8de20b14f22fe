#include "cairo/owl/xml.hpp"

#include <charconv>
#include <cstdint>

namespace cairo {

XmlSyntaxError::XmlSyntaxError(std::size_t offset, const std::string& message)
    : Error("XmlSyntaxError", "byte " + std::to_string(offset) + ": " + message), offset_(offset) {}

const std::string* XmlElement::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

namespace {

bool name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  XmlElement document() {
    if (s_.substr(0, 3) == "\xEF\xBB\xBF") i_ = 3;
    skip_ws();
    if (s_.substr(i_, 5) == "<?xml") {
      auto end = s_.find("?>", i_);
      if (end == std::string_view::npos) fail("unterminated XML declaration");
      i_ = end + 2;
    }
    misc();
    if (i_ >= s_.size()) fail("expected root element, found end of input");
    if (s_[i_] != '<') fail("expected root element");
    XmlElement root = element();
    misc();
    if (i_ != s_.size()) fail("content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw XmlSyntaxError(i_, msg); }

  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
  }

  void misc() {
    for (;;) {
      skip_ws();
      if (s_.substr(i_, 4) == "<!--") comment();
      else if (s_.substr(i_, 2) == "<!") fail("DTDs are not supported");
      else if (s_.substr(i_, 2) == "<?") fail("processing instructions are not supported");
      else return;
    }
  }

  void comment() {
    auto end = s_.find("-->", i_ + 4);
    if (end == std::string_view::npos) {
      i_ = s_.size();
      fail("unterminated comment");
    }
    i_ = end + 3;
  }

  std::string name() {
    if (i_ >= s_.size()) fail("unexpected end of input, expected a name");
    if (!name_start(s_[i_])) fail("expected a name");
    std::size_t b = i_;
    while (i_ < s_.size() && name_char(s_[i_])) ++i_;
    return std::string(s_.substr(b, i_ - b));
  }

  void expect(char c) {
    if (i_ >= s_.size()) fail(std::string("unexpected end of input, expected '") + c + "'");
    if (s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  void entity(std::string& out) {
    std::size_t start = i_;
    auto semi = s_.find(';', i_);
    if (semi == std::string_view::npos || semi - i_ > 12) fail("unterminated entity reference");
    std::string_view ref = s_.substr(i_ + 1, semi - i_ - 1);
    i_ = semi + 1;
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (!ref.empty() && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref.size() > 1 && ref[1] == 'x';
      auto digits = ref.substr(hex ? 2 : 1);
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (digits.empty() || res.ec != std::errc() || res.ptr != digits.data() + digits.size() || cp > 0x10FFFF) {
        i_ = start;
        fail("invalid character reference");
      }
      append_utf8(out, cp);
    } else {
      i_ = start;
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
  }

  std::string attribute_value() {
    if (i_ >= s_.size()) fail("unexpected end of input, expected an attribute value");
    if (s_[i_] != '"' && s_[i_] != '\'') fail("expected a quoted attribute value");
    char q = s_[i_++];
    std::string out;
    for (;;) {
      if (i_ >= s_.size()) fail("unterminated attribute value");
      char c = s_[i_];
      if (c == q) break;
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') entity(out);
      else out += s_[i_++];
    }
    ++i_;
    return out;
  }

  XmlElement element() {
    XmlElement e;
    e.offset = i_;
    expect('<');
    e.name = name();
    for (;;) {
      std::size_t before = i_;
      skip_ws();
      if (i_ >= s_.size()) fail("unexpected end of input in start tag");
      if (s_[i_] == '/') {
        ++i_;
        expect('>');
        return e;
      }
      if (s_[i_] == '>') {
        ++i_;
        break;
      }
      if (before == i_) fail("expected whitespace before attribute");
      std::string key = name();
      skip_ws();
      expect('=');
      skip_ws();
      if (e.attribute(key)) fail("duplicate attribute '" + key + "'");
      e.attributes.emplace_back(std::move(key), attribute_value());
    }
    for (;;) {
      if (i_ >= s_.size()) fail("unexpected end of input, '" + e.name + "' is not closed");
      char c = s_[i_];
      if (c == '<') {
        if (s_.substr(i_, 4) == "<!--") {
          comment();
        } else if (s_.substr(i_, 9) == "<![CDATA[") {
          auto end = s_.find("]]>", i_);
          if (end == std::string_view::npos) {
            i_ = s_.size();
            fail("unterminated CDATA section");
          }
          e.text += s_.substr(i_ + 9, end - i_ - 9);
          i_ = end + 3;
        } else if (s_.substr(i_, 2) == "</") {
          i_ += 2;
          std::string closing = name();
          if (closing != e.name) fail("mismatched closing tag '" + closing + "' for '" + e.name + "'");
          skip_ws();
          expect('>');
          break;
        } else {
          e.children.push_back(element());
        }
      } else if (c == '&') {
        entity(e.text);
      } else {
        e.text += c;
        ++i_;
      }
    }
    if (!e.children.empty()) {
      bool blank = true;
      for (char c : e.text) blank = blank && (c == ' ' || c == '\t' || c == '\n' || c == '\r');
      if (!blank) fail("mixed content in '" + e.name + "' is not supported");
      e.text.clear();
    }
    return e;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

XmlElement parse_xml(std::string_view bytes) { return Parser(bytes).document(); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

void XmlWriter::start_tag(const std::string& name, const Attrs& attrs) {
  out_.append(2 * stack_.size(), ' ');
  out_ += "<" + name;
  for (const auto& [k, v] : attrs) out_ += " " + k + "=\"" + xml_escape(v) + "\"";
}

void XmlWriter::open(const std::string& name, const Attrs& attrs) {
  start_tag(name, attrs);
  out_ += ">\n";
  stack_.push_back(name);
}

void XmlWriter::close() {
  std::string name = stack_.back();
  stack_.pop_back();
  out_.append(2 * stack_.size(), ' ');
  out_ += "</" + name + ">\n";
}

void XmlWriter::empty(const std::string& name, const Attrs& attrs) {
  start_tag(name, attrs);
  out_ += "/>\n";
}

void XmlWriter::text(const std::string& name, const Attrs& attrs, const std::string& body) {
  start_tag(name, attrs);
  out_ += ">" + xml_escape(body) + "</" + name + ">\n";
}

std::string XmlWriter::finish() {
  while (!stack_.empty()) close();
  return std::move(out_);
}

}  // namespace cairo
