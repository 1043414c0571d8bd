#include <doctest.h>

#include <arpa/inet.h>
#include <fstream>
#include <netinet/in.h>
#include <random>
#include <json.hpp>
#include <sys/socket.h>
#include <unistd.h>

#include "feather/config.hpp"
#include "feather/experiment.hpp"
#include "feather/light_client.hpp"
#include "feather/transport.hpp"
#include "feather/wire.hpp"

using namespace feather;

namespace {

ConfigError::Kind error_kind(std::string_view text, std::size_t* line = nullptr, std::string* field = nullptr)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        if (line) *line = e.line();
        if (field) *field = e.field();
        return e.kind();
    }
    FAIL("config was accepted");
    return ConfigError::Kind::ParseError;
}

class Echo : public MessageHandler {
public:
    WireMessage handle(const WireMessage& req) override { return req; }
};

} // namespace

TEST_SUITE("cli_config")
{
    TEST_CASE("minimal config gets the documented defaults")
    {
        const auto cfg = parse_config("[node]\nendpoint = 127.0.0.1:1\n[ledger]\nendpoint = 127.0.0.1:2\n");
        CHECK(cfg.node_endpoint == "127.0.0.1:1");
        CHECK(cfg.ledger_endpoint == "127.0.0.1:2");
        CHECK(cfg.daemon.headers_per_proof == 64);
        CHECK(cfg.daemon.proofs_per_tx == 12);
        CHECK(cfg.daemon.backend == "mock");
        CHECK(cfg.gas.base_cost_per_tx == 35800);
        CHECK(cfg.gas.cost_per_proof == 225138);
        CHECK(cfg.gas.block_gas_limit == 36000000);
        CHECK(cfg.sim.compact_target == 0x207fffffu);
    }

    TEST_CASE("every documented key parses")
    {
        const std::string text = R"(
# full config
[node]
endpoint = 10.0.0.1:9000
[ledger]
endpoint = 10.0.0.2:9001
[daemon]
headers_per_proof = 32
proofs_per_tx = 4
poll_interval_ms = 250
state_path = /tmp/x.progress
backend = recompute
sender = bob
[setup]
seed = 7
[sim]
seed = 3
compact_target = 0x207fffff
txs_per_block = 2
chain_length = 99
[gas]
base_cost_per_tx = 1000
cost_per_proof = 2000
block_gas_limit = 100000
[client]
store_path = /tmp/c.store
)";
        const auto cfg = parse_config(text);
        CHECK(cfg.daemon.headers_per_proof == 32);
        CHECK(cfg.daemon.proofs_per_tx == 4);
        CHECK(cfg.daemon.poll_interval == std::chrono::milliseconds(250));
        CHECK(cfg.daemon.state_path == "/tmp/x.progress");
        CHECK(cfg.daemon.backend == "recompute");
        CHECK(cfg.daemon.sender == "bob");
        CHECK(cfg.daemon.setup_seed == 7);
        CHECK(cfg.sim.seed == 3);
        CHECK(cfg.sim.txs_per_block == 2);
        CHECK(cfg.sim.chain_length == 99);
        CHECK(cfg.gas.block_gas_limit == 100000);
        CHECK(cfg.client_store == "/tmp/c.store");

        const std::string doc = documented_config_keys();
        for (const char* key : {"node.endpoint", "ledger.endpoint", "daemon.headers_per_proof", "daemon.proofs_per_tx",
                                "daemon.poll_interval_ms", "daemon.state_path", "daemon.backend", "daemon.sender",
                                "setup.seed", "sim.seed", "sim.compact_target", "sim.txs_per_block", "sim.chain_length",
                                "gas.base_cost_per_tx", "gas.cost_per_proof", "gas.block_gas_limit",
                                "client.store_path"}) {
            CHECK(doc.find(key) != std::string::npos);
        }
    }

    TEST_CASE("config errors carry line and field")
    {
        CHECK(error_kind("") == ConfigError::Kind::ParseError);
        CHECK(error_kind("# only a comment\n") == ConfigError::Kind::ParseError);
        std::size_t line = 0;
        std::string field;
        CHECK(error_kind("[daemon]\nheaders_per_proof = 64\nproofs_per_tx = 200\n", &line, &field) ==
              ConfigError::Kind::InvariantViolation);
        CHECK(line == 3);
        CHECK(field == "daemon.proofs_per_tx");
        CHECK(error_kind("[daemon]\nbogus = 1\n", &line, &field) == ConfigError::Kind::ParseError);
        CHECK(line == 2);
        CHECK(field == "daemon.bogus");
        CHECK(error_kind("[daemon]\nheaders_per_proof = lots\n", &line) == ConfigError::Kind::ParseError);
        CHECK(line == 2);
        CHECK(error_kind("[daemon\n") == ConfigError::Kind::ParseError);
        CHECK(error_kind("[daemon]\nno equals sign\n") == ConfigError::Kind::ParseError);
        CHECK(error_kind("[daemon]\nproofs_per_tx = 1\nproofs_per_tx = 2\n") == ConfigError::Kind::ParseError);
        CHECK(error_kind("[daemon]\nheaders_per_proof = 0\n") == ConfigError::Kind::InvariantViolation);
        CHECK(error_kind("[daemon]\nbackend = groth16\n") == ConfigError::Kind::InvariantViolation);
        CHECK(error_kind("[sim]\ncompact_target = 0\n") == ConfigError::Kind::InvariantViolation);
        CHECK_THROWS_AS(load_config("/nonexistent/feather.ini"), ConfigError);
    }

    TEST_CASE("shipped sample config loads")
    {
        const auto cfg = load_config(FEATHER_SOURCE_DIR "/config/local.ini");
        CHECK(cfg.daemon.proofs_per_tx == 4);
        CHECK_FALSE(cfg.node_endpoint.empty());
    }

    TEST_CASE("frame layout")
    {
        const Bytes f = encode_frame({"GET_TIP", "{}"});
        REQUIRE(f.size() == 4 + 7 + 1 + 2);
        CHECK(f[0] == 0);
        CHECK(f[3] == 10);
        CHECK(read_frame_length(f) == 10);
        CHECK(decode_frame(f) == WireMessage{"GET_TIP", "{}"});
        Bytes cut(f.begin(), f.end() - 1);
        CHECK_THROWS_AS(decode_frame(cut), WireError);
    }

    TEST_CASE("frames round-trip up to 16 MiB and refuse more")
    {
        std::mt19937_64 rng(4);
        for (std::size_t size : {std::size_t{0}, std::size_t{1}, std::size_t{1000}, std::size_t{65536}}) {
            std::string body(size, '\0');
            for (auto& c : body) c = static_cast<char>(rng());
            const WireMessage m{"SUBMIT_BUNDLE", body};
            CHECK(decode_frame(encode_frame(m)) == m);
        }
        const std::string kindname = "GET_BLOCK";
        const std::size_t max_body = kMaxFrameSize - kindname.size() - 1;
        const WireMessage big{kindname, std::string(max_body, 'x')};
        const Bytes frame = encode_frame(big);
        CHECK(frame.size() == 4 + kMaxFrameSize);
        CHECK(decode_frame(frame) == big);
        try {
            encode_frame({kindname, std::string(max_body + 1, 'x')});
            FAIL("expected FrameTooLarge");
        } catch (const WireError& e) {
            CHECK(e.kind() == WireError::Kind::FrameTooLarge);
        }
        const std::uint8_t prefix[4] = {0x01, 0x00, 0x00, 0x01};
        CHECK_THROWS_AS(read_frame_length(prefix), WireError);
    }

    TEST_CASE("structured errors")
    {
        const WireMessage e = make_error("NotFound", "no such block");
        CHECK(e.kind == kind::kError);
        const auto body = nlohmann::json::parse(e.body);
        CHECK(body["code"] == "NotFound");
        try {
            raise_if_error(e);
            FAIL("expected remote error");
        } catch (const WireError& err) {
            CHECK(err.kind() == WireError::Kind::Remote);
            CHECK(err.code() == "NotFound");
        }
        CHECK_NOTHROW(raise_if_error({"GET_TIP", "{}"}));
        CHECK_THROWS_AS(decode_frame_payload(as_bytes("no-newline")), WireError);
    }

    TEST_CASE("tcp server answers concurrent clients and rejects oversized frames")
    {
        Echo echo;
        TcpServer server(echo);
        REQUIRE(server.port() != 0);
        Endpoint ep{"127.0.0.1", server.port()};
        std::vector<std::thread> clients;
        std::atomic<int> ok{0};
        for (int t = 0; t < 4; ++t) {
            clients.emplace_back([&, t] {
                TcpTransport client(ep);
                for (int i = 0; i < 20; ++i) {
                    const WireMessage m{"GET_TIP", std::to_string(t * 100 + i)};
                    if (client.roundtrip(m) == m) ++ok;
                }
            });
        }
        for (auto& c : clients) c.join();
        CHECK(ok == 80);

        // A raw oversized length prefix gets an ERROR reply.
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(server.port());
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        const std::uint8_t prefix[4] = {0x02, 0x00, 0x00, 0x00};
        REQUIRE(::write(fd, prefix, 4) == 4);
        std::uint8_t len[4];
        REQUIRE(::read(fd, len, 4) == 4);
        const std::uint32_t n = read_frame_length(len);
        Bytes payload(n);
        std::size_t got = 0;
        while (got < n) {
            const auto r = ::read(fd, payload.data() + got, n - got);
            REQUIRE(r > 0);
            got += static_cast<std::size_t>(r);
        }
        ::close(fd);
        const WireMessage reply = decode_frame_payload(payload);
        CHECK(reply.kind == kind::kError);
        CHECK(nlohmann::json::parse(reply.body)["code"] == "FrameTooLarge");

        server.stop();
        TcpTransport late(ep);
        CHECK_THROWS_AS(late.roundtrip({"GET_TIP", "{}"}), TransportError);
    }

    TEST_CASE("node and ledger over tcp with a light client")
    {
        SimConfig sim;
        sim.chain_length = 100;
        SimulatedNetwork net(sim, kMockBackend, 16, 1);
        NodeService node_service(net.node());
        LedgerService ledger_service(net.ledger());
        TcpServer node_server(node_service);
        TcpServer ledger_server(ledger_service);
        TcpTransport nt({"127.0.0.1", node_server.port()});
        TcpTransport lt({"127.0.0.1", ledger_server.port()});
        NodeClient node(nt);
        LedgerClient ledger(lt);

        DaemonConfig cfg;
        cfg.headers_per_proof = 16;
        cfg.proofs_per_tx = 2;
        cfg.state_path = scratch_path("feather-tcp");
        ProverDaemon daemon(cfg, net.keys().proving_key, node, ledger);
        daemon.sync_step();
        std::filesystem::remove(cfg.state_path);
        CHECK(net.ledger().latest_checkpoint().height == 96);

        ClientStore store;
        const auto txid = net.node().block_at(70).transactions[1].txid;
        const auto rep = verify_transaction(txid, store, ledger, node);
        CHECK(rep.verified);
        CHECK(rep.checkpoint_used.height == 64);
        CHECK(rep.headers_downloaded == 6);

        const auto unknown = nt.roundtrip({"GET_SOMETHING", "{}"});
        CHECK(unknown.kind == kind::kError);
        CHECK(nlohmann::json::parse(unknown.body)["code"] == "UnknownKind");
    }

    TEST_CASE("experiment files parse and reports are deterministic")
    {
        const auto spec = parse_experiment(R"(
[experiment]
scenario = submission
sweep = 1,16,32,160,161

[expect]
gas_k1 = 260938
gas_k32 = 7240210
accepted_k161.max = 0
)");
        CHECK(spec.sweep == std::vector<std::uint64_t>{1, 16, 32, 160, 161});
        CHECK(spec.expect.size() == 3);
        const auto a = run_experiment(spec);
        const auto b = run_experiment(spec);
        CHECK(a.text == b.text);
        CHECK(a.ok());
        CHECK(a.metrics.at("gas_k160") == 36057880);

        auto failing = spec;
        failing.expect["gas_k1"] = 1;
        CHECK_FALSE(run_experiment(failing).ok());

        CHECK_THROWS_AS(parse_experiment("[experiment]\nscenario = submission\nwhatever = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_experiment("[sim]\nseed = 1\n"), ConfigError);

        for (const char* name : {"upkeep", "storage", "e2e"}) {
            const auto d = default_experiment(name);
            CHECK(run_experiment(d).text == run_experiment(d).text);
        }
    }

    TEST_CASE("shipped experiment files meet their expectations")
    {
        for (const char* file : {"submission.ini", "upkeep.ini", "storage.ini"}) {
            const auto report = run_experiment(load_experiment(std::string(FEATHER_SOURCE_DIR "/experiments/") + file));
            INFO(report.text);
            CHECK(report.ok());
        }
    }
}
