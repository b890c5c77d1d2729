#include "openverse/harness/net_client.hpp"

#include <stdexcept>

#include <boost/asio.hpp>
#include <boost/asio/ssl.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/ssl.hpp>
#include <boost/beast/websocket.hpp>
#include <boost/beast/websocket/ssl.hpp>

namespace openverse {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace ssl = asio::ssl;
using tcp = asio::ip::tcp;
using asio::use_awaitable;

std::string Url::origin() const {
    return scheme + "://" + host + ":" + port;
}

Url parse_url(std::string_view text) {
    Url url;
    const auto sep = text.find("://");
    if (sep == std::string_view::npos) throw std::invalid_argument("URL without scheme: " + std::string(text));
    url.scheme = std::string(text.substr(0, sep));
    if (url.scheme == "ws" || url.scheme == "http") {
        url.tls = false;
    } else if (url.scheme == "wss" || url.scheme == "https") {
        url.tls = true;
    } else {
        throw std::invalid_argument("unsupported URL scheme " + url.scheme);
    }
    std::string_view rest = text.substr(sep + 3);
    const auto slash = rest.find('/');
    std::string_view authority = rest.substr(0, slash);
    url.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    if (authority.empty()) throw std::invalid_argument("URL without host: " + std::string(text));

    std::string_view host = authority;
    std::string_view port;
    if (authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) throw std::invalid_argument("bad IPv6 literal in " + std::string(text));
        host = authority.substr(1, close - 1);
        if (close + 1 < authority.size() && authority[close + 1] == ':') port = authority.substr(close + 2);
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon + 1);
    }
    url.host = std::string(host);
    url.port = port.empty() ? (url.tls ? "443" : "80") : std::string(port);
    return url;
}

Url with_http_scheme(const Url& url, std::string target) {
    Url out = url;
    out.scheme = url.tls ? "https" : "http";
    out.target = std::move(target);
    return out;
}

namespace {

std::string host_header(const Url& url) {
    const bool default_port = (url.tls && url.port == "443") || (!url.tls && url.port == "80");
    const bool v6 = url.host.find(':') != std::string::npos;
    const std::string host = v6 ? "[" + url.host + "]" : url.host;
    return default_port ? host : host + ":" + url.port;
}

void configure_client_tls(ssl::context& ctx, bool insecure) {
    if (insecure) {
        ctx.set_verify_mode(ssl::verify_none);
    } else {
        ctx.set_default_verify_paths();
        ctx.set_verify_mode(ssl::verify_peer);
    }
}

template <class Stream>
HttpResponse do_get(Stream& stream, const Url& url) {
    http::request<http::empty_body> req{http::verb::get, url.target, 11};
    req.set(http::field::host, host_header(url));
    req.set(http::field::user_agent, "openverse-bench");
    http::write(stream, req);
    beast::flat_buffer buffer;
    http::response_parser<http::string_body> parser;
    parser.body_limit(64 * 1024 * 1024);
    http::read(stream, buffer, parser);
    auto res = parser.release();
    return {static_cast<int>(res.result_int()), std::string(res[http::field::content_type]), std::move(res.body())};
}

}  // namespace

HttpResponse http_get(const Url& url, bool insecure, std::chrono::milliseconds timeout) {
    asio::io_context ioc;
    tcp::resolver resolver(ioc);
    const auto endpoints = resolver.resolve(url.host, url.port);
    if (!url.tls) {
        beast::tcp_stream stream(ioc);
        stream.expires_after(timeout);
        stream.connect(endpoints);
        auto res = do_get(stream, url);
        beast::error_code ec;
        stream.socket().shutdown(tcp::socket::shutdown_both, ec);
        return res;
    }
    ssl::context ctx(ssl::context::tls_client);
    configure_client_tls(ctx, insecure);
    beast::ssl_stream<beast::tcp_stream> stream(ioc, ctx);
    if (!SSL_set_tlsext_host_name(stream.native_handle(), url.host.c_str())) {
        throw boost::system::system_error(static_cast<int>(::ERR_get_error()), asio::error::get_ssl_category());
    }
    if (!insecure) stream.set_verify_callback(ssl::host_name_verification(url.host));
    beast::get_lowest_layer(stream).expires_after(timeout);
    beast::get_lowest_layer(stream).connect(endpoints);
    stream.handshake(ssl::stream_base::client);
    auto res = do_get(stream, url);
    beast::error_code ec;
    stream.shutdown(ec);
    return res;
}

namespace {

class PlainWs final : public WsClient {
public:
    explicit PlainWs(asio::io_context& ioc) : strand_(asio::make_strand(ioc)), ws_(strand_) {}

    executor_type executor() override { return strand_; }

    asio::awaitable<void> connect(Url url) override {
        tcp::resolver resolver(strand_);
        auto endpoints = co_await resolver.async_resolve(url.host, url.port, use_awaitable);
        beast::get_lowest_layer(ws_).expires_after(std::chrono::seconds(10));
        co_await beast::get_lowest_layer(ws_).async_connect(endpoints, use_awaitable);
        beast::get_lowest_layer(ws_).socket().set_option(tcp::no_delay(true));
        beast::get_lowest_layer(ws_).expires_never();
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::client));
        co_await ws_.async_handshake(host_header(url), url.target, use_awaitable);
        ws_.text(true);
    }

    asio::awaitable<void> write(std::string frame) override {
        co_await ws_.async_write(asio::buffer(frame), use_awaitable);
    }

    asio::awaitable<std::string> read() override {
        beast::flat_buffer buffer;
        co_await ws_.async_read(buffer, use_awaitable);
        co_return beast::buffers_to_string(buffer.data());
    }

    void abort() override {
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).close();
    }

private:
    executor_type strand_;
    websocket::stream<beast::tcp_stream> ws_;
};

class TlsWs final : public WsClient {
public:
    TlsWs(asio::io_context& ioc, bool insecure)
        : strand_(asio::make_strand(ioc)), ctx_(ssl::context::tls_client), insecure_(insecure) {
        configure_client_tls(ctx_, insecure);
        ws_ = std::make_unique<websocket::stream<beast::ssl_stream<beast::tcp_stream>>>(strand_, ctx_);
    }

    executor_type executor() override { return strand_; }

    asio::awaitable<void> connect(Url url) override {
        tcp::resolver resolver(strand_);
        auto endpoints = co_await resolver.async_resolve(url.host, url.port, use_awaitable);
        auto& tcp_layer = beast::get_lowest_layer(*ws_);
        tcp_layer.expires_after(std::chrono::seconds(10));
        co_await tcp_layer.async_connect(endpoints, use_awaitable);
        tcp_layer.socket().set_option(tcp::no_delay(true));
        SSL_set_tlsext_host_name(ws_->next_layer().native_handle(), url.host.c_str());
        if (!insecure_) ws_->next_layer().set_verify_callback(ssl::host_name_verification(url.host));
        co_await ws_->next_layer().async_handshake(ssl::stream_base::client, use_awaitable);
        tcp_layer.expires_never();
        ws_->set_option(websocket::stream_base::timeout::suggested(beast::role_type::client));
        co_await ws_->async_handshake(host_header(url), url.target, use_awaitable);
        ws_->text(true);
    }

    asio::awaitable<void> write(std::string frame) override {
        co_await ws_->async_write(asio::buffer(frame), use_awaitable);
    }

    asio::awaitable<std::string> read() override {
        beast::flat_buffer buffer;
        co_await ws_->async_read(buffer, use_awaitable);
        co_return beast::buffers_to_string(buffer.data());
    }

    void abort() override {
        beast::error_code ec;
        beast::get_lowest_layer(*ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(*ws_).close();
    }

private:
    executor_type strand_;
    ssl::context ctx_;
    bool insecure_;
    std::unique_ptr<websocket::stream<beast::ssl_stream<beast::tcp_stream>>> ws_;
};

}  // namespace

std::unique_ptr<WsClient> WsClient::create(asio::io_context& ioc, bool tls, bool insecure) {
    if (tls) return std::make_unique<TlsWs>(ioc, insecure);
    return std::make_unique<PlainWs>(ioc);
}

}  // namespace openverse
