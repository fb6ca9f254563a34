#include "gos/codec.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "gos/hex.hpp"
#include "gos/rng.hpp"

namespace gos {

GosLevel parse_gos_level(std::string_view bits) {
  if (bits.size() > 16) throw CodecError("GoS level string longer than 16 bits");
  uint16_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw CodecError("GoS level string has non-binary character");
    v = static_cast<uint16_t>(v << 1 | (c == '1'));
  }
  return GosLevel{v};
}

namespace {

void put16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_object(std::vector<uint8_t>& out, uint8_t class_num, uint8_t c_type,
                std::span<const uint8_t> body) {
  const size_t padded = (body.size() + 3) / 4 * 4;
  put16(out, static_cast<uint16_t>(4 + padded));
  out.push_back(class_num);
  out.push_back(c_type);
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), padded - body.size(), 0);
}

std::vector<uint8_t> body32(uint32_t a, uint32_t b) {
  std::vector<uint8_t> v;
  put32(v, a);
  put32(v, b);
  return v;
}

struct Reader {
  std::span<const uint8_t> data;
  size_t pos = 0;

  size_t remaining() const { return data.size() - pos; }
  uint16_t u16() {
    const uint16_t v = static_cast<uint16_t>(data[pos] << 8 | data[pos + 1]);
    pos += 2;
    return v;
  }
  uint32_t u32() {
    const uint32_t v = static_cast<uint32_t>(data[pos]) << 24 |
                       static_cast<uint32_t>(data[pos + 1]) << 16 |
                       static_cast<uint32_t>(data[pos + 2]) << 8 | data[pos + 3];
    pos += 4;
    return v;
  }
};

}  // namespace

std::vector<uint8_t> encode(const ControlMessage& msg) {
  std::vector<uint8_t> objs;
  uint8_t msg_type = 0;

  if (const auto* p = std::get_if<PathMsg>(&msg)) {
    msg_type = kMsgTypePath;
    put_object(objs, kClassSession, 1, body32(p->session, p->hop));
    if (p->gos_path) {
      std::vector<uint8_t> b;
      put16(b, p->gos_path->level.value);
      put32(b, p->gos_path->gosp_phop);
      put_object(objs, kClassGosPath, 1, b);
    }
  } else if (const auto* r = std::get_if<ResvMsg>(&msg)) {
    msg_type = kMsgTypeResv;
    put_object(objs, kClassSession, 1, body32(r->session, r->hop));
    if (r->gos_resv) {
      std::vector<uint8_t> b;
      put16(b, r->gos_resv->granted_level.value);
      put_object(objs, kClassGosResv, 1, b);
    }
  } else if (const auto* h = std::get_if<HelloReq>(&msg)) {
    msg_type = kMsgTypeHello;
    put_object(objs, kClassHello, 1, body32(h->src_instance, h->dst_instance));
    if (h->gos_req) put_object(objs, kClassGosReq, 1, body32(h->gos_req->flow_id, h->gos_req->packet_id));
  } else if (const auto* a = std::get_if<HelloAck>(&msg)) {
    msg_type = kMsgTypeHello;
    put_object(objs, kClassHello, 2, body32(a->src_instance, a->dst_instance));
    if (a->gos_ack) {
      std::vector<uint8_t> b;
      put32(b, a->gos_ack->flow_id);
      put32(b, a->gos_ack->packet_id);
      put32(b, a->gos_ack->found ? 1u : 0u);
      put_object(objs, kClassGosAck, 1, b);
    }
  }

  std::vector<uint8_t> out;
  out.push_back(0x10);  // version 1
  out.push_back(msg_type);
  put16(out, static_cast<uint16_t>(4 + objs.size()));
  out.insert(out.end(), objs.begin(), objs.end());
  return out;
}

DecodeResult decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4) throw CodecError("message shorter than header");
  Reader r{bytes};
  const uint8_t version_flags = bytes[0];
  if ((version_flags >> 4) != 1) throw CodecError("unsupported version");
  const uint8_t msg_type = bytes[1];
  r.pos = 2;
  const uint16_t total = r.u16();
  if (total != bytes.size()) throw CodecError("message length field does not match buffer");
  if (total % 4 != 0) throw CodecError("message length not a multiple of 4");

  struct Obj {
    uint8_t class_num;
    uint8_t c_type;
    std::span<const uint8_t> body;
  };
  std::vector<Obj> objects;
  while (r.remaining() > 0) {
    if (r.remaining() < 4) throw CodecError("truncated object header");
    const uint16_t len = r.u16();
    const uint8_t class_num = bytes[r.pos];
    const uint8_t c_type = bytes[r.pos + 1];
    r.pos += 2;
    if (len < 4) throw CodecError("object length below header size");
    if (len % 4 != 0) throw CodecError("object length not a multiple of 4");
    if (len - 4 > r.remaining()) throw CodecError("truncated object body");
    objects.push_back({class_num, c_type, bytes.subspan(r.pos, len - 4)});
    r.pos += len - 4;
  }

  DecodeResult out{HelloReq{}, {}};

  auto read32 = [](std::span<const uint8_t> b, size_t at) {
    return static_cast<uint32_t>(b[at]) << 24 | static_cast<uint32_t>(b[at + 1]) << 16 |
           static_cast<uint32_t>(b[at + 2]) << 8 | b[at + 3];
  };
  auto read16 = [](std::span<const uint8_t> b, size_t at) {
    return static_cast<uint16_t>(b[at] << 8 | b[at + 1]);
  };

  auto expect_size = [](const Obj& o, size_t sz) {
    if (o.body.size() != sz) throw CodecError("object body size mismatch");
  };

  if (msg_type == kMsgTypePath || msg_type == kMsgTypeResv) {
    bool have_session = false;
    uint32_t session = 0, hop = 0;
    std::optional<GosPathObject> gpath;
    std::optional<GosResvObject> gresv;
    for (const auto& o : objects) {
      if (o.class_num == kClassSession && o.c_type == 1) {
        if (have_session) throw CodecError("duplicate session object");
        expect_size(o, 8);
        session = read32(o.body, 0);
        hop = read32(o.body, 4);
        have_session = true;
      } else if (msg_type == kMsgTypePath && o.class_num == kClassGosPath && o.c_type == 1) {
        if (gpath) throw CodecError("duplicate GoS Path object");
        expect_size(o, 8);
        gpath = GosPathObject{GosLevel{read16(o.body, 0)}, read32(o.body, 2)};
      } else if (msg_type == kMsgTypeResv && o.class_num == kClassGosResv && o.c_type == 1) {
        if (gresv) throw CodecError("duplicate GoS Resv object");
        expect_size(o, 4);
        gresv = GosResvObject{GosLevel{read16(o.body, 0)}};
      } else {
        out.skipped_classes.push_back(o.class_num);
      }
    }
    if (!have_session) throw CodecError("missing session object");
    if (msg_type == kMsgTypePath)
      out.msg = PathMsg{session, hop, gpath};
    else
      out.msg = ResvMsg{session, hop, gresv};
  } else if (msg_type == kMsgTypeHello) {
    bool have_hello = false;
    uint8_t hello_ctype = 0;
    uint32_t src = 0, dst = 0;
    std::optional<GosReqObject> greq;
    std::optional<GosAckObject> gack;
    for (const auto& o : objects) {
      if (o.class_num == kClassHello && (o.c_type == 1 || o.c_type == 2)) {
        if (have_hello) throw CodecError("duplicate hello object");
        expect_size(o, 8);
        src = read32(o.body, 0);
        dst = read32(o.body, 4);
        hello_ctype = o.c_type;
        have_hello = true;
      }
    }
    if (!have_hello) throw CodecError("missing hello object");
    // GoS objects are matched against the hello direction; a request object
    // inside an ack (or vice versa) is skipped like any other foreign class.
    std::vector<uint8_t> skipped;
    for (const auto& o : objects) {
      if (o.class_num == kClassHello) continue;
      if (hello_ctype == 1 && o.class_num == kClassGosReq && o.c_type == 1) {
        if (greq) throw CodecError("duplicate GoS Request object");
        expect_size(o, 8);
        greq = GosReqObject{read32(o.body, 0), read32(o.body, 4)};
      } else if (hello_ctype == 2 && o.class_num == kClassGosAck && o.c_type == 1) {
        if (gack) throw CodecError("duplicate GoS Ack object");
        expect_size(o, 12);
        gack = GosAckObject{read32(o.body, 0), read32(o.body, 4), (read32(o.body, 8) & 1) != 0};
      } else {
        skipped.push_back(o.class_num);
      }
    }
    out.skipped_classes = std::move(skipped);
    if (hello_ctype == 1)
      out.msg = HelloReq{src, dst, greq};
    else
      out.msg = HelloAck{src, dst, gack};
  } else {
    throw CodecError("unknown message type " + std::to_string(msg_type));
  }
  return out;
}

ControlMessage random_control_message(Rng& rng) {
  const uint64_t shape = rng.next_u64() % 4;
  const bool with_gos = rng.next_u64() % 2 == 0;
  auto u32 = [&] { return static_cast<uint32_t>(rng.next_u64()); };
  auto u16v = [&] { return static_cast<uint16_t>(rng.next_u64()); };
  switch (shape) {
    case 0: {
      PathMsg m{u32(), u32(), std::nullopt};
      if (with_gos) m.gos_path = GosPathObject{GosLevel{u16v()}, u32()};
      return m;
    }
    case 1: {
      ResvMsg m{u32(), u32(), std::nullopt};
      if (with_gos) m.gos_resv = GosResvObject{GosLevel{u16v()}};
      return m;
    }
    case 2: {
      HelloReq m{u32(), u32(), std::nullopt};
      if (with_gos) m.gos_req = GosReqObject{u32(), u32()};
      return m;
    }
    default: {
      HelloAck m{u32(), u32(), std::nullopt};
      if (with_gos) m.gos_ack = GosAckObject{u32(), u32(), rng.next_u64() % 2 == 0};
      return m;
    }
  }
}

int verify_golden_dir(const std::string& dir, std::ostream& diag) {
  namespace fs = std::filesystem;
  int failures = 0;
  bool dumped = false;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".hex") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    diag << "no .hex vectors under " << dir << "\n";
    return 1;
  }
  for (const auto& f : files) {
    std::ifstream in(f);
    std::vector<uint8_t> bytes;
    try {
      bytes = parse_hex(in);
      const DecodeResult dec = decode(bytes);
      const std::vector<uint8_t> re = encode(dec.msg);
      if (re != bytes) throw CodecError("re-encoded bytes differ");
      if (!dec.skipped_classes.empty()) throw CodecError("golden vector has unknown objects");
    } catch (const std::exception& e) {
      ++failures;
      diag << "golden vector " << f.filename().string() << " failed: " << e.what() << "\n";
      if (!dumped && !bytes.empty()) {
        diag << to_hex(bytes) << "\n";
        dumped = true;
      }
    }
  }
  return failures;
}

}  // namespace gos
