#include "ffbt/pager.hpp"

#include <algorithm>
#include <string>

#include "ffbt/errors.hpp"

namespace ffbt {

void spin_for(std::chrono::nanoseconds d) noexcept {
  if (d.count() <= 0) return;
  const auto until = std::chrono::steady_clock::now() + d;
  while (std::chrono::steady_clock::now() < until) {
  }
}

bool OpBuffer::is_resident(NodeId id) const noexcept {
  return std::find(resident.begin(), resident.end(), id) != resident.end();
}

bool OpBuffer::is_dirty(NodeId id) const noexcept {
  return std::find(dirty.begin(), dirty.end(), id) != dirty.end();
}

Pager::Pager(NodeStore& store, LatencyConfig latency) : store_(&store), latency_(latency) {
  buffer_.resident.reserve(64);
  buffer_.dirty.reserve(16);
}

void Pager::require_op(const char* what) const {
  if (!in_op_) throw ProtocolError(std::string(what) + " outside of an operation");
}

const OpBuffer& Pager::begin_op() {
  if (in_op_) throw ProtocolError("begin_op while an operation is in flight");
  in_op_ = true;
  buffer_.resident.clear();
  buffer_.dirty.clear();
  buffer_.header.clear();
  buffer_.allocated.clear();
  reads_ = 0;
  return buffer_;
}

Node* Pager::try_fetch(NodeId id) {
  require_op("fetch");
  Node* node = store_->try_get(id);
  if (node == nullptr) return nullptr;
  if (!buffer_.is_resident(id)) {
    buffer_.resident.push_back(id);
    ++reads_;
    spin_for(latency_.read);
  }
  return node;
}

Node& Pager::fetch(NodeId id) {
  Node* node = try_fetch(id);
  if (node == nullptr) throw CorruptionError("fetch of unknown node id " + std::to_string(id.value));
  return *node;
}

void Pager::mark_dirty(NodeId id) {
  require_op("mark_dirty");
  if (!buffer_.is_resident(id)) throw ProtocolError("mark_dirty on non-resident node " + std::to_string(id.value));
  if (!buffer_.is_dirty(id)) buffer_.dirty.push_back(id);
}

void Pager::mark_header(NodeId id) {
  require_op("mark_header");
  if (!buffer_.is_resident(id)) throw ProtocolError("mark_header on non-resident node " + std::to_string(id.value));
  if (std::find(buffer_.header.begin(), buffer_.header.end(), id) == buffer_.header.end()) buffer_.header.push_back(id);
}

NodeId Pager::allocate(NodeKind kind) {
  require_op("allocate");
  const NodeId id = store_->allocate(kind);
  buffer_.resident.push_back(id);
  buffer_.dirty.push_back(id);
  buffer_.allocated.push_back(id);
  return id;
}

IoReport Pager::current() const noexcept {
  const std::uint64_t writes = buffer_.dirty.size();
  std::uint64_t header_only = 0;
  for (const NodeId id : buffer_.header) header_only += buffer_.is_dirty(id) ? 0 : 1;
  return IoReport{reads_, writes, reads_ + writes, header_only};
}

IoReport Pager::end_op() {
  require_op("end_op");
  const IoReport report = current();
  for (std::uint64_t i = 0; i < report.writes + report.header_writes; ++i) spin_for(latency_.write);
  buffer_.resident.clear();
  buffer_.dirty.clear();
  buffer_.header.clear();
  buffer_.allocated.clear();
  reads_ = 0;
  in_op_ = false;
  return report;
}

}  // namespace ffbt
