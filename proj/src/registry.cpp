#include "ugw/registry.hpp"

#include <cstdio>
#include <fstream>

#include "ugw/bytes.hpp"
#include "ugw/errors.hpp"
#include "ugw/opcount.hpp"

namespace ugw {

bool Registry::try_insert(const UserRecord& rec) {
  std::lock_guard lock(mu_);
  for (const auto& r : records_)
    if (r.uid == rec.uid) return false;
  records_.push_back(rec);
  return true;
}

bool Registry::is_active(const Digest160& uid) const {
  std::lock_guard lock(mu_);
  for (const auto& r : records_)
    if (r.uid == uid) return r.status == 1;
  return false;
}

size_t Registry::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::vector<UserRecord> Registry::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

namespace {

constexpr char kMagic[] = "UGWRG1";  // 6 bytes, no NUL on disk
constexpr size_t kMagicLen = 6;
constexpr size_t kRecordLen = 20 + 8 + 1 + 4;  // uid, stamp, status, crc

Bytes record_body(const UserRecord& rec) {
  Bytes body;
  append(body, rec.uid.bytes());
  put_be64(body, rec.registered_at);
  body.push_back(rec.status);
  return body;
}

// First four digest bytes over the record body. Not a secret; it exists so
// load can tell torn or bit-rotted files from good ones.
std::array<uint8_t, 4> record_crc(const Bytes& body) {
  ops::SuppressHashCount guard;
  Digest160 d = hash160(body);
  return {d.v[0], d.v[1], d.v[2], d.v[3]};
}

}  // namespace

void persist_registry(const Registry& reg, const std::string& path) {
  std::vector<UserRecord> records = reg.snapshot();

  Bytes out;
  out.insert(out.end(), kMagic, kMagic + kMagicLen);
  put_be32(out, static_cast<uint32_t>(records.size()));
  for (const auto& rec : records) {
    Bytes body = record_body(rec);
    append(out, body);
    append(out, record_crc(body));
  }

  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw ProtocolError(ErrKind::kStateError,
                          "registry: cannot open " + tmp + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f)
      throw ProtocolError(ErrKind::kStateError, "registry: write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ProtocolError(ErrKind::kStateError,
                        "registry: rename into place failed");
  }
}

Registry load_registry(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ProtocolError(ErrKind::kStateError, "registry: cannot open " + path);
  Bytes raw((std::istreambuf_iterator<char>(f)),
            std::istreambuf_iterator<char>());

  if (raw.size() < kMagicLen + 4 ||
      !std::equal(kMagic, kMagic + kMagicLen, raw.begin()))
    throw ProtocolError(ErrKind::kStateError, "registry: bad file header");
  size_t off = kMagicLen;
  uint32_t count = get_be32(std::span(raw).subspan(off, 4));
  off += 4;
  if (raw.size() != off + static_cast<size_t>(count) * kRecordLen)
    throw ProtocolError(ErrKind::kStateError, "registry: truncated file");

  Registry reg;
  for (uint32_t i = 0; i < count; ++i) {
    std::span<const uint8_t> slot(raw.data() + off, kRecordLen);
    UserRecord rec;
    rec.uid = Digest160::from(slot.subspan(0, 20));
    rec.registered_at = get_be64(slot.subspan(20, 8));
    rec.status = slot[28];
    Bytes body(slot.begin(), slot.begin() + 29);
    auto crc = record_crc(body);
    if (!std::equal(crc.begin(), crc.end(), slot.begin() + 29))
      throw ProtocolError(ErrKind::kStateError,
                          "registry: record checksum mismatch");
    if (!reg.try_insert(rec))
      throw ProtocolError(ErrKind::kStateError, "registry: duplicate uid");
    off += kRecordLen;
  }
  return reg;
}

}  // namespace ugw
