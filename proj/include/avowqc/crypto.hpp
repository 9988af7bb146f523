#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "avowqc/adversary.hpp"
#include "avowqc/bits.hpp"

namespace avowqc {

enum class PartyId { Alice, Bob, Charlie, Eve };

std::string to_string(PartyId p);
PartyId party_from_string(const std::string& s);

// 256-bit one-way digest.
struct Digest {
    BitString bits;  // always 256 bits

    bool operator==(const Digest&) const = default;
    std::string to_hex() const { return bits.to_hex(); }
    static Digest from_hex(const std::string& hex);
};

// Identifier of the hash function the parties agreed on. A registry of one:
// SHA-256 over the framed bit string (left-pad to whole bytes, append one
// length-mod-256 byte).
inline constexpr int HASH_FUNCTION_SHA256_FRAMED = 1;
std::string hash_function_name(int id);

// Digest of a raw bit string of any length, including 0. Framing: the bits
// are left-padded with zero bits to a whole number of bytes, packed
// most-significant-bit first, then one suffix byte holding the original
// length mod 256 is appended; SHA-256 of those bytes is the digest. The
// framing is part of the wire format.
Digest hash_digest(const BitString& m);

// SHA-256 of raw bytes (no framing); exposed so tests can pin the
// primitive against published vectors.
Digest sha256_bytes(const std::vector<uint8_t>& data);

// One-time-pad key shared by a pair of parties. Bits are consumed
// monotonically; a consumed bit can never be consumed again.
class Key {
public:
    Key() = default;
    Key(BitString bits, PartyId a, PartyId b) : bits_(std::move(bits)), owners_{a, b} {}

    std::size_t size() const { return bits_.size(); }
    std::size_t consumed() const { return consumed_; }
    std::size_t remaining() const { return bits_.size() - consumed_; }
    std::pair<PartyId, PartyId> owner_pair() const { return owners_; }

    // Takes the next `length` unconsumed bits.
    BitString consume(std::size_t length);

    // Takes the bits [offset, offset+length). offset must not rewind into
    // consumed territory; skipping ahead discards the skipped bits.
    BitString consume_at(std::size_t offset, std::size_t length);

    // Read-only view for evidence verification; does not move the
    // consumption watermark.
    BitString bits_at(std::size_t offset, std::size_t length) const;

private:
    BitString bits_;
    std::pair<PartyId, PartyId> owners_{PartyId::Alice, PartyId::Charlie};
    std::size_t consumed_ = 0;
};

// XOR ciphertext together with the index of the first key bit used.
struct Ciphertext {
    BitString bits;
    std::size_t key_offset = 0;

    bool operator==(const Ciphertext&) const = default;
};

Ciphertext otp_encrypt(Key& key, const BitString& plaintext);
BitString otp_decrypt(Key& key, const Ciphertext& c);

// BB84 key establishment between two ends of a quantum channel.
// Operating points: 4x raw pairs per requested key bit, one quarter of the
// sifted bits sacrificed for error estimation, abort above 11% measured
// error.
inline constexpr std::size_t BB84_RAW_MULTIPLIER = 4;
inline constexpr double BB84_SAMPLE_FRACTION = 0.25;
inline constexpr double BB84_QBER_THRESHOLD = 0.11;

struct Bb84Result {
    std::optional<Key> key;    // present iff the run completed
    BitString sender_key_bits;    // post-sift, post-sample bits at the sender
    BitString receiver_key_bits;  // same positions at the receiver
    double qber = 0.0;
    std::size_t raw_count = 0;
    std::size_t sifted_count = 0;
    std::size_t sampled_count = 0;
    bool aborted = false;
};

// Simulates one BB84 session: random bits and random Z/X bases at the
// sender, random bases at the receiver, sifting, then sample-based error
// estimation. Returns a key of exactly `length` bits; sets `aborted` when
// the measured error exceeds the threshold; throws ProtocolAbort when
// sifting and sampling leave fewer than `length` bits (callers re-run
// with fresh pulses).
Bb84Result bb84_establish_key(std::size_t length, uint64_t seed, Eve* eve = nullptr,
                              PartyId sender = PartyId::Alice, PartyId receiver = PartyId::Charlie);

}  // namespace avowqc
