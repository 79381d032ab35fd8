#include <charconv>
#include <cstring>
#include <fstream>
#include <string>

#include "ffbt/errors.hpp"
#include "ffbt/workloads.hpp"

namespace ffbt::workloads {

std::string_view to_string(KeyFormat f) noexcept { return f == KeyFormat::kText ? "text" : "binary"; }

KeyFormat parse_key_format(std::string_view name) {
  if (name == "text") return KeyFormat::kText;
  if (name == "binary") return KeyFormat::kBinary;
  throw ConfigError("unknown key format '" + std::string(name) + "' (expected text or binary)");
}

void write_keys(const std::filesystem::path& path, const std::vector<Key>& keys, KeyFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open key file for writing: " + path.string());
  if (format == KeyFormat::kText) {
    std::string buf;
    for (const Key k : keys) {
      buf += std::to_string(k);
      buf += '\n';
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  } else {
    std::string buf(keys.size() * 8, '\0');
    for (std::size_t i = 0; i < keys.size(); ++i) {
      for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<char>((keys[i] >> (8 * b)) & 0xff);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw ConfigError("failed writing key file: " + path.string());
}

std::vector<Key> read_keys(const std::filesystem::path& path, KeyFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open key file: " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<Key> keys;
  if (format == KeyFormat::kBinary) {
    if (data.size() % 8 != 0) {
      throw ParseError(path.string() + ": truncated record at byte offset " + std::to_string(data.size() / 8 * 8));
    }
    keys.resize(data.size() / 8);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      Key k = 0;
      for (int b = 0; b < 8; ++b) k |= static_cast<Key>(static_cast<unsigned char>(data[i * 8 + b])) << (8 * b);
      keys[i] = k;
    }
    return keys;
  }
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    ++line;
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string_view text(data.data() + pos, end - pos);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (!text.empty()) {
      Key k = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError(path.string() + ": line " + std::to_string(line) + ": not an unsigned 64-bit key: '" +
                         std::string(text.substr(0, 40)) + "'");
      }
      keys.push_back(k);
    }
    pos = end + 1;
  }
  return keys;
}

}  // namespace ffbt::workloads
