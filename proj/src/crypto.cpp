#include "avowqc/crypto.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <numeric>

#include "avowqc/errors.hpp"
#include "avowqc/quantum.hpp"

namespace avowqc {

std::string to_string(PartyId p) {
    switch (p) {
        case PartyId::Alice: return "alice";
        case PartyId::Bob: return "bob";
        case PartyId::Charlie: return "charlie";
        case PartyId::Eve: return "eve";
    }
    return "?";
}

PartyId party_from_string(const std::string& s) {
    if (s == "alice") return PartyId::Alice;
    if (s == "bob") return PartyId::Bob;
    if (s == "charlie") return PartyId::Charlie;
    if (s == "eve") return PartyId::Eve;
    throw ParseError("unknown party: " + s);
}

Digest Digest::from_hex(const std::string& hex) {
    Digest d{BitString::from_hex(hex)};
    if (d.bits.size() != 256) throw DimensionError("digest must be 256 bits");
    return d;
}

std::string hash_function_name(int id) {
    if (id == HASH_FUNCTION_SHA256_FRAMED) return "sha256-framed";
    throw ParseError("unknown hash function id");
}

Digest sha256_bytes(const std::vector<uint8_t>& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &md_len, EVP_sha256(), nullptr) != 1 || md_len != 32)
        throw Error("SHA-256 computation failed");
    BitString bits;
    for (unsigned int i = 0; i < md_len; ++i) bits.append_uint(md[i], 8);
    return Digest{std::move(bits)};
}

Digest hash_digest(const BitString& m) {
    std::vector<uint8_t> data = m.to_bytes_left_padded();
    data.push_back(static_cast<uint8_t>(m.size() % 256));
    return sha256_bytes(data);
}

BitString Key::consume(std::size_t length) { return consume_at(consumed_, length); }

BitString Key::consume_at(std::size_t offset, std::size_t length) {
    if (offset < consumed_) throw KeyError("key bits at this offset were already consumed");
    if (offset + length > bits_.size()) throw KeyError("key exhausted");
    consumed_ = offset + length;
    return bits_.slice(offset, length);
}

BitString Key::bits_at(std::size_t offset, std::size_t length) const {
    if (offset + length > bits_.size()) throw KeyError("key offset out of range");
    return bits_.slice(offset, length);
}

Ciphertext otp_encrypt(Key& key, const BitString& plaintext) {
    const std::size_t offset = key.consumed();
    const BitString pad = key.consume(plaintext.size());
    return Ciphertext{plaintext ^ pad, offset};
}

BitString otp_decrypt(Key& key, const Ciphertext& c) {
    const BitString pad = key.consume_at(c.key_offset, c.bits.size());
    return c.bits ^ pad;
}

Bb84Result bb84_establish_key(std::size_t length, uint64_t seed, Eve* eve, PartyId sender, PartyId receiver) {
    if (length < 1) throw ProtocolError("key length must be at least 1");

    Bb84Result result;
    result.raw_count = length * BB84_RAW_MULTIPLIER;

    CounterRng sender_rng(derive_seed(seed, "bb84-sender"));
    CounterRng receiver_rng(derive_seed(seed, "bb84-receiver"));

    std::vector<uint8_t> sent_bits(result.raw_count), sent_bases(result.raw_count);
    std::vector<uint8_t> recv_bits(result.raw_count), recv_bases(result.raw_count);

    for (std::size_t i = 0; i < result.raw_count; ++i) {
        sent_bits[i] = static_cast<uint8_t>(sender_rng.next_bit());
        sent_bases[i] = static_cast<uint8_t>(sender_rng.next_bit());  // 0 = Z, 1 = X
        recv_bases[i] = static_cast<uint8_t>(receiver_rng.next_bit());

        // One fresh qubit per pulse; eigenstate of the sender's basis.
        QuantumRegister pulse(1, derive_seed(seed, "bb84-pulse", i));
        QubitId q = pulse.allocate_qubit();
        if (sent_bases[i] == 0) {
            pulse.prepare_single(q, Amp(sent_bits[i] ? 0.0 : 1.0), Amp(sent_bits[i] ? 1.0 : 0.0));
        } else {
            const double inv = 0.70710678118654752440;
            pulse.prepare_single(q, Amp(inv), Amp(sent_bits[i] ? -inv : inv));
        }
        if (eve != nullptr) eve->attack_in_transit(pulse, q);
        recv_bits[i] = static_cast<uint8_t>(recv_bases[i] == 0 ? pulse.measure_z(q) : pulse.measure_x(q));
    }

    // Sifting: keep pulses where the bases agree.
    std::vector<std::size_t> sifted;
    for (std::size_t i = 0; i < result.raw_count; ++i) {
        if (sent_bases[i] == recv_bases[i]) sifted.push_back(i);
    }
    result.sifted_count = sifted.size();

    // Error estimation on a random quarter of the sifted positions,
    // chosen from the receiver's stream and compared publicly.
    result.sampled_count = static_cast<std::size_t>(static_cast<double>(sifted.size()) * BB84_SAMPLE_FRACTION);
    std::vector<std::size_t> order(sifted.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < result.sampled_count; ++i) {
        const std::size_t j = i + receiver_rng.next_below(order.size() - i);
        std::swap(order[i], order[j]);
    }
    std::size_t errors = 0;
    for (std::size_t i = 0; i < result.sampled_count; ++i) {
        const std::size_t p = sifted[order[i]];
        if (sent_bits[p] != recv_bits[p]) ++errors;
    }
    result.qber = result.sampled_count == 0 ? 0.0
                                            : static_cast<double>(errors) / static_cast<double>(result.sampled_count);

    if (result.qber > BB84_QBER_THRESHOLD) {
        result.aborted = true;
        return result;
    }

    // Remaining sifted bits, in channel order, become the key.
    std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(result.sampled_count), order.end());
    std::sort(kept.begin(), kept.end());
    if (kept.size() < length) throw ProtocolAbort("insufficient raw bits after sifting and sampling");
    for (std::size_t i = 0; i < length; ++i) {
        const std::size_t p = sifted[kept[i]];
        result.sender_key_bits.push_back(sent_bits[p]);
        result.receiver_key_bits.push_back(recv_bits[p]);
    }
    result.key = Key(result.sender_key_bits, sender, receiver);
    return result;
}

}  // namespace avowqc
