#pragma once

// Minimal XML reader/writer: elements, attributes, character data, comments,
// the XML declaration and the five predefined entities plus character
// references. No DTDs, no processing instructions beyond the declaration.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cairo/core/model.hpp"

namespace cairo {

class XmlSyntaxError : public Error {
 public:
  XmlSyntaxError(std::size_t offset, const std::string& message);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlElement> children;
  std::string text;         // concatenated character data
  std::size_t offset = 0;   // byte offset of '<'

  const std::string* attribute(std::string_view key) const;
};

XmlElement parse_xml(std::string_view bytes);

std::string xml_escape(std::string_view s);

// Two-space indented writer; one element per line.
class XmlWriter {
 public:
  using Attrs = std::vector<std::pair<std::string, std::string>>;

  void open(const std::string& name, const Attrs& attrs = {});
  void close();
  void empty(const std::string& name, const Attrs& attrs = {});
  void text(const std::string& name, const Attrs& attrs, const std::string& body);
  std::string finish();

 private:
  void start_tag(const std::string& name, const Attrs& attrs);

  std::string out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::vector<std::string> stack_;
};

}  // namespace cairo
