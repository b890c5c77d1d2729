#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <boost/asio/awaitable.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/io_context.hpp>

namespace openverse {

/// A parsed ws://, wss://, http:// or https:// URL.
struct Url {
    std::string scheme;
    bool tls = false;
    std::string host;
    std::string port;
    std::string target = "/";

    /// scheme://host:port (no target).
    std::string origin() const;
};

/// Throws std::invalid_argument on unsupported schemes or a missing host.
Url parse_url(std::string_view text);

/// Same host and port with the scheme switched between ws(s) and http(s)
/// and the given target.
Url with_http_scheme(const Url& url, std::string target);

struct HttpResponse {
    int status = 0;
    std::string content_type;
    std::string body;
};

/// Blocking GET. `insecure` skips certificate verification for https.
/// Throws boost::system::system_error on connection failures.
HttpResponse http_get(const Url& url, bool insecure = false,
                      std::chrono::milliseconds timeout = std::chrono::seconds(10));

/// Minimal WebSocket client used by the load harness bots. One read and one
/// write may be outstanding at a time; all calls must run on executor().
class WsClient {
public:
    using executor_type = boost::asio::strand<boost::asio::io_context::executor_type>;

    virtual ~WsClient() = default;

    static std::unique_ptr<WsClient> create(boost::asio::io_context& ioc, bool tls, bool insecure);

    virtual executor_type executor() = 0;
    virtual boost::asio::awaitable<void> connect(Url url) = 0;
    virtual boost::asio::awaitable<void> write(std::string frame) = 0;
    virtual boost::asio::awaitable<std::string> read() = 0;
    /// Tears down the TCP connection; pending operations fail.
    virtual void abort() = 0;
};

}  // namespace openverse
