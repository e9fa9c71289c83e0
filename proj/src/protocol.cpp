#include "wfl/protocol.hpp"

namespace wfl {

Frame recv_step(Mesh &io, const SessionCtx &ctx, Role from, std::uint8_t type) {
    Selector sel;
    sel.from = from;
    sel.round = ctx.round;
    sel.step = ctx.step;
    sel.type = type;
    auto [src, f] = io.recv(sel, ctx.timeout);
    if (f.session != ctx.sid)
        throw SessionMismatch("frame from " + role_name(src) +
                              " belongs to another session");
    return f;
}

namespace {

std::vector<std::uint8_t> encode_fe_vec(const std::vector<FieldElement> &v) {
    std::vector<std::uint8_t> out;
    out.reserve(4 + 8 * v.size());
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    for (const auto &e : v) put_fe(out, e);
    return out;
}

std::vector<FieldElement> decode_fe_vec(const Frame &f, const FieldConfig &cfg) {
    PayloadReader r(f.payload);
    const std::uint32_t n = r.u32();
    std::vector<FieldElement> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(r.fe(cfg));
    r.expect_end();
    return out;
}

} // namespace

std::vector<FieldElement> reshare_vec(PartyId party,
                                      const std::vector<FieldElement> &xs,
                                      Mesh &io, SessionCtx &ctx, SeededRng &rng,
                                      const ProtocolHooks &hooks) {
    if (hooks.skip_reshare) return xs;
    const std::size_t d = xs.size();
    std::vector<FieldElement> r_own;
    r_own.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
        r_own.push_back(hooks.zero_reshare_randomness ? FieldElement(0, ctx.cfg)
                                                      : rng.sample(ctx.cfg));
    io.send(server_role(party.next()), ctx.make(msg::RESHARE_R, encode_fe_vec(r_own)));
    const Frame f = recv_step(io, ctx, server_role(party.prev()), msg::RESHARE_R);
    const auto r_prev = decode_fe_vec(f, ctx.cfg);
    if (r_prev.size() != d)
        throw LengthMismatch("reshare batch size disagrees with predecessor");
    std::vector<FieldElement> out;
    out.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
        out.push_back(xs[j] + r_own[j] - r_prev[j]);
    ctx.step++;
    return out;
}

FieldElement reshare(PartyId party, const FieldElement &x_i, Mesh &io,
                     SessionCtx &ctx, SeededRng &rng, const ProtocolHooks &hooks) {
    return reshare_vec(party, {x_i}, io, ctx, rng, hooks).front();
}

FieldElement local_add(const FieldElement &a_i, const FieldElement &b_i) {
    return a_i + b_i;
}

std::vector<FieldElement> ZeroSumOracle::mul_vec(PartyId party,
                                                 const std::vector<FieldElement> &x_i,
                                                 const std::vector<FieldElement> &y_i,
                                                 Mesh &io, SessionCtx &ctx) {
    const std::size_t d = x_i.size();
    if (y_i.size() != d)
        throw LengthMismatch("multiplication operands differ in length");

    // Reshare x and y with independent randomness, batched into one frame:
    // the first d values pad x, the second d pad y.
    std::vector<FieldElement> both;
    both.reserve(2 * d);
    both.insert(both.end(), x_i.begin(), x_i.end());
    both.insert(both.end(), y_i.begin(), y_i.end());
    both = reshare_vec(party, both, io, ctx, *rng_, hooks_);
    std::vector<FieldElement> xp(both.begin(), both.begin() + d);
    std::vector<FieldElement> yp(both.begin() + d, both.end());

    // Forward the reshared pairs around the ring.
    std::vector<FieldElement> fwd;
    fwd.reserve(2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        fwd.push_back(xp[j]);
        fwd.push_back(yp[j]);
    }
    io.send(server_role(party.next()), ctx.make(msg::MUL_FORWARD, encode_fe_vec(fwd)));
    const Frame f = recv_step(io, ctx, server_role(party.prev()), msg::MUL_FORWARD);
    const auto recv = decode_fe_vec(f, ctx.cfg);
    if (recv.size() != 2 * d)
        throw LengthMismatch("forwarded batch size disagrees with predecessor");
    ctx.step++;

    // z_i = x_i' y_i' + x_i' y_{i-1}' + x_{i-1}' y_i'
    std::vector<FieldElement> z;
    z.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        const FieldElement &px = recv[2 * j];
        const FieldElement &py = recv[2 * j + 1];
        z.push_back(xp[j] * yp[j] + xp[j] * py + px * yp[j]);
    }
    return z;
}

std::vector<FieldElement> BeaverOracle::mul_vec(PartyId party,
                                                const std::vector<FieldElement> &x_i,
                                                const std::vector<FieldElement> &y_i,
                                                Mesh &io, SessionCtx &ctx) {
    const std::size_t d = x_i.size();
    if (y_i.size() != d)
        throw LengthMismatch("multiplication operands differ in length");

    // Fetch d fresh triples from the dealer.
    std::vector<std::uint8_t> req;
    put_u32(req, static_cast<std::uint32_t>(d));
    try {
        io.send(Role::dealer, ctx.make(msg::BEAVER_TRIPLE, std::move(req)));
    } catch (const ChannelClosed &) {
        throw DealerUnavailable("cannot reach the triple dealer");
    }
    const Frame tf = recv_step(io, ctx, Role::dealer, msg::BEAVER_TRIPLE);
    PayloadReader tr(tf.payload);
    if (tr.u32() != d) throw LengthMismatch("dealer returned a wrong batch size");
    std::vector<FieldElement> a, b, c;
    a.reserve(d), b.reserve(d), c.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        a.push_back(tr.fe(ctx.cfg));
        b.push_back(tr.fe(ctx.cfg));
        c.push_back(tr.fe(ctx.cfg));
    }
    tr.expect_end();
    ctx.step++;

    // Broadcast shares of d = x - a and e = y - b; everyone reconstructs.
    std::vector<FieldElement> dd, ee;
    dd.reserve(d), ee.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        dd.push_back(x_i[j] - a[j]);
        ee.push_back(y_i[j] - b[j]);
    }
    std::vector<FieldElement> mine;
    mine.reserve(2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        mine.push_back(dd[j]);
        mine.push_back(ee[j]);
    }
    const auto payload = encode_fe_vec(mine);
    io.send(server_role(party.next()), ctx.make(msg::BEAVER_OPEN, payload));
    io.send(server_role(party.prev()), ctx.make(msg::BEAVER_OPEN, payload));
    for (PartyId other : {party.next(), party.prev()}) {
        const Frame of = recv_step(io, ctx, server_role(other), msg::BEAVER_OPEN);
        const auto vals = decode_fe_vec(of, ctx.cfg);
        if (vals.size() != 2 * d)
            throw LengthMismatch("opening batch size disagrees with peer");
        for (std::size_t j = 0; j < d; ++j) {
            dd[j] = dd[j] + vals[2 * j];
            ee[j] = ee[j] + vals[2 * j + 1];
        }
    }
    ctx.step++;

    std::vector<FieldElement> z;
    z.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        FieldElement zj = c[j] + dd[j] * b[j] + ee[j] * a[j];
        if (party.id() == 1) zj = zj + dd[j] * ee[j];
        z.push_back(zj);
    }
    return z;
}

std::unique_ptr<MultiplicationOracle> make_oracle(OracleKind kind, SeededRng &rng,
                                                  ProtocolHooks hooks) {
    if (kind == OracleKind::zero_sum)
        return std::make_unique<ZeroSumOracle>(rng, hooks);
    return std::make_unique<BeaverOracle>();
}

void open_send(PartyId party, const std::vector<FieldElement> &shares, Mesh &io,
               SessionCtx &ctx, Role receiver) {
    std::vector<std::uint8_t> payload;
    payload.reserve(5 + 8 * shares.size());
    payload.push_back(static_cast<std::uint8_t>(party.id()));
    put_u32(payload, static_cast<std::uint32_t>(shares.size()));
    for (const auto &e : shares) put_fe(payload, e);
    io.send(receiver, ctx.make(msg::OPEN_SHARE, std::move(payload)));
    ctx.step++;
}

std::vector<FieldElement> open_recv(Mesh &io, SessionCtx &ctx) {
    std::array<std::vector<FieldElement>, 3> parts;
    std::array<bool, 3> have{};
    for (int i = 0; i < 3; ++i) {
        Selector sel;
        sel.session = ctx.sid;
        sel.step = ctx.step;
        sel.type = msg::OPEN_SHARE;
        auto [src, f] = io.recv(sel, ctx.timeout);
        (void)src;
        PayloadReader r(f.payload);
        const std::uint8_t idx = r.u8();
        if (idx < 1 || idx > 3) throw DecodeError("bad share index");
        const std::uint32_t n = r.u32();
        std::vector<FieldElement> vals;
        vals.reserve(n);
        for (std::uint32_t j = 0; j < n; ++j) vals.push_back(r.fe(ctx.cfg));
        r.expect_end();
        if (have[idx - 1]) throw MissingComponent("duplicate share component");
        have[idx - 1] = true;
        parts[idx - 1] = std::move(vals);
    }
    const std::size_t d = parts[0].size();
    if (parts[1].size() != d || parts[2].size() != d)
        throw LengthMismatch("opened vectors differ in length");
    std::vector<FieldElement> out;
    out.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
        out.push_back(parts[0][j] + parts[1][j] + parts[2][j]);
    ctx.step++;
    return out;
}

std::vector<FieldElement> scalar_vector_mul(PartyId party, const FieldElement &n_i,
                                            const std::vector<FieldElement> &w_i,
                                            Mesh &io, SessionCtx &ctx,
                                            MultiplicationOracle &oracle) {
    std::vector<FieldElement> ns(w_i.size(), n_i);
    return oracle.mul_vec(party, ns, w_i, io, ctx);
}

void BeaverDealer::serve_one(Mesh &io, std::chrono::milliseconds timeout) {
    Selector sel;
    sel.type = msg::BEAVER_TRIPLE;
    auto [src, f] = io.recv(sel, timeout);
    const int sid = static_cast<int>(src);
    if (sid < 1 || sid > 3) return; // only MPC servers hold triple shares
    PayloadReader r(f.payload);
    const std::uint32_t d = r.u32();
    r.expect_end();

    const Key key{f.session, f.round, f.step};
    auto it = batches_.find(key);
    if (it == batches_.end()) {
        std::array<std::vector<FieldElement>, 3> shares;
        for (auto &s : shares) s.reserve(3 * d);
        for (std::uint32_t j = 0; j < d; ++j) {
            FieldElement a = rng_.sample(cfg_);
            FieldElement b = rng_.sample(cfg_);
            if (degenerate_zero_) {
                a = FieldElement(0, cfg_);
                b = FieldElement(0, cfg_);
            }
            const FieldElement c = a * b;
            const SecretShares sa = split(a, cfg_, rng_);
            const SecretShares sb = split(b, cfg_, rng_);
            const SecretShares sc = split(c, cfg_, rng_);
            for (int i = 0; i < 3; ++i) {
                shares[i].push_back(sa.components[i]);
                shares[i].push_back(sb.components[i]);
                shares[i].push_back(sc.components[i]);
            }
        }
        it = batches_.emplace(key, std::move(shares)).first;
        served_mask_[key] = 0;
    } else if (it->second[0].size() != 3 * d) {
        throw LengthMismatch("servers disagree on triple batch size");
    }

    int &mask = served_mask_[key];
    if (mask & (1 << (sid - 1)))
        throw TripleReuse("party re-requested an already served triple batch");
    mask |= 1 << (sid - 1);

    std::vector<std::uint8_t> payload;
    payload.reserve(4 + 8 * 3 * d);
    put_u32(payload, d);
    for (const auto &e : it->second[sid - 1]) put_fe(payload, e);
    Frame reply;
    reply.session = f.session;
    reply.round = f.round;
    reply.step = f.step;
    reply.type = msg::BEAVER_TRIPLE;
    reply.payload = std::move(payload);
    io.send(src, std::move(reply));

    if (mask == 0b111) {
        batches_.erase(key);
        served_mask_.erase(key);
    }
}

void BeaverDealer::run(Mesh &io) {
    for (;;) {
        try {
            serve_one(io, std::chrono::milliseconds(3600 * 1000));
        } catch (const ChannelClosed &) {
            return;
        } catch (const TimeoutError &) {
            return;
        }
    }
}

} // namespace wfl
