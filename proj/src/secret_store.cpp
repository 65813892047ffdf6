#include "ugw/secret_store.hpp"

#include <sys/stat.h>

#include <cstdio>
#include <fstream>

#include "ugw/bytes.hpp"
#include "ugw/cipher.hpp"
#include "ugw/errors.hpp"
#include "ugw/opcount.hpp"
#include "ugw/wire.hpp"

namespace ugw {

bool SecretStore::insert(const SecretEntry& entry) {
  std::lock_guard lock(mu_);
  for (const auto& e : entries_)
    if (e.mid == entry.mid) return false;
  entries_.push_back(entry);
  return true;
}

std::optional<SecretEntry> SecretStore::find(const Digest160& mid) const {
  std::lock_guard lock(mu_);
  for (const auto& e : entries_)
    if (e.mid == mid) return e;
  return std::nullopt;
}

size_t SecretStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<SecretEntry> SecretStore::snapshot() const {
  std::lock_guard lock(mu_);
  return entries_;
}

namespace {

constexpr size_t kMagicLen = 6;  // "UGWGS" + profile digit
constexpr size_t kEntryLen = 20 + 20 + 24 + 40 + 16 + 4;
constexpr uint8_t kFlagPlain = 0;
constexpr uint8_t kFlagWrapped = 1;
constexpr std::string_view kWrapContext = "SECSTORE";

std::array<uint8_t, 4> entry_crc(std::span<const uint8_t> body) {
  ops::SuppressHashCount guard;
  Digest160 d = hash160(body);
  return {d.v[0], d.v[1], d.v[2], d.v[3]};
}

SymmetricKey wrap_key(const std::string& passphrase) {
  ops::SuppressHashCount guard;
  Digest160 d = hash160_cat({to_bytes("UGWSS"), to_bytes(passphrase)});
  SymmetricKey k;
  std::copy_n(d.v.begin(), SymmetricKey::kSize, k.v.begin());
  return k;
}

Digest160 wrap_tag(const SymmetricKey& key, std::span<const uint8_t> plain) {
  ops::SuppressHashCount guard;
  return hash160_cat({key.bytes(), plain});
}

Bytes encode_entries(const std::vector<SecretEntry>& entries,
                     const CurveParams& cp) {
  Bytes out;
  put_be32(out, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    Bytes body;
    append(body, e.mid.bytes());
    append(body, e.uid.bytes());
    append(body, encode_scalar(e.secrets.gwr_j));
    append(body, encode_point(e.secrets.s_i, cp));
    append(body, e.secrets.k_gw.bytes());
    append(out, body);
    append(out, entry_crc(body));
  }
  return out;
}

std::vector<SecretEntry> decode_entries(std::span<const uint8_t> raw,
                                        const CurveParams& cp) {
  if (raw.size() < 4)
    throw ProtocolError(ErrKind::kStateError, "secret store: truncated block");
  uint32_t count = get_be32(raw.subspan(0, 4));
  if (raw.size() != 4 + static_cast<size_t>(count) * kEntryLen)
    throw ProtocolError(ErrKind::kStateError,
                        "secret store: block length mismatch");

  std::vector<SecretEntry> entries;
  size_t off = 4;
  for (uint32_t i = 0; i < count; ++i) {
    std::span<const uint8_t> slot = raw.subspan(off, kEntryLen);
    auto crc = entry_crc(slot.subspan(0, kEntryLen - 4));
    if (!std::equal(crc.begin(), crc.end(), slot.begin() + kEntryLen - 4))
      throw ProtocolError(ErrKind::kStateError,
                          "secret store: entry checksum mismatch");
    SecretEntry e;
    e.mid = Digest160::from(slot.subspan(0, 20));
    e.uid = Digest160::from(slot.subspan(20, 20));
    auto gwr = decode_scalar(slot.subspan(40, 24), cp);
    auto s_i = decode_point(slot.subspan(64, 40), cp);
    if (!gwr || !s_i)
      throw ProtocolError(ErrKind::kStateError,
                          "secret store: entry fails curve validation");
    e.secrets.gwr_j = *gwr;
    e.secrets.s_i = *s_i;
    std::copy_n(slot.begin() + 104, SymmetricKey::kSize,
                e.secrets.k_gw.v.begin());
    entries.push_back(e);
    off += kEntryLen;
  }
  return entries;
}

}  // namespace

void persist_secret_store(const SecretStore& store, const std::string& path,
                          const CurveParams& cp,
                          const std::string& passphrase) {
  Bytes block = encode_entries(store.snapshot(), cp);

  Bytes out;
  Bytes magic = to_bytes("UGWGS");
  append(out, magic);
  out.push_back(static_cast<uint8_t>(profile_digit(cp)));
  if (passphrase.empty()) {
    out.push_back(kFlagPlain);
    append(out, block);
  } else {
    SymmetricKey key = wrap_key(passphrase);
    out.push_back(kFlagWrapped);
    append(out, wrap_tag(key, block).bytes());
    append(out, sym_encrypt(key, kWrapContext, block));
  }

  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw ProtocolError(ErrKind::kStateError,
                          "secret store: cannot open " + tmp + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f)
      throw ProtocolError(ErrKind::kStateError, "secret store: write failed");
  }
  ::chmod(tmp.c_str(), 0600);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ProtocolError(ErrKind::kStateError,
                        "secret store: rename into place failed");
  }
}

SecretStore load_secret_store(const std::string& path, const CurveParams& cp,
                              const std::string& passphrase) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ProtocolError(ErrKind::kStateError,
                        "secret store: cannot open " + path);
  Bytes raw((std::istreambuf_iterator<char>(f)),
            std::istreambuf_iterator<char>());

  if (raw.size() < kMagicLen + 1 ||
      !std::equal(raw.begin(), raw.begin() + 5, "UGWGS") ||
      raw[5] != static_cast<uint8_t>(profile_digit(cp)))
    throw ProtocolError(ErrKind::kStateError, "secret store: bad file header");

  uint8_t flags = raw[kMagicLen];
  std::span<const uint8_t> rest(raw.data() + kMagicLen + 1,
                                raw.size() - kMagicLen - 1);

  std::vector<SecretEntry> entries;
  if (flags == kFlagPlain) {
    if (!passphrase.empty())
      throw ProtocolError(ErrKind::kStateError,
                          "secret store: file is unencrypted but a "
                          "passphrase was supplied");
    entries = decode_entries(rest, cp);
  } else if (flags == kFlagWrapped) {
    if (passphrase.empty())
      throw ProtocolError(ErrKind::kStateError,
                          "secret store: file is encrypted; passphrase "
                          "required");
    if (rest.size() < Digest160::kSize)
      throw ProtocolError(ErrKind::kStateError, "secret store: truncated tag");
    SymmetricKey key = wrap_key(passphrase);
    Digest160 tag = Digest160::from(rest.subspan(0, Digest160::kSize));
    Bytes block =
        sym_decrypt(key, kWrapContext, rest.subspan(Digest160::kSize));
    if (wrap_tag(key, block) != tag)
      throw ProtocolError(ErrKind::kStateError,
                          "secret store: wrong passphrase or damaged file");
    entries = decode_entries(block, cp);
  } else {
    throw ProtocolError(ErrKind::kStateError, "secret store: unknown flags");
  }

  SecretStore store;
  for (const auto& e : entries)
    if (!store.insert(e))
      throw ProtocolError(ErrKind::kStateError, "secret store: duplicate mid");
  return store;
}

}  // namespace ugw
