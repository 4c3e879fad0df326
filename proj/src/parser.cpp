#include "leakscan/parser.hpp"

#include <charconv>
#include <map>
#include <set>
#include <unordered_map>

namespace leakscan {

namespace {

class Parser {
public:
  Parser(std::span<const Token> tokens, std::string path)
      : toks_(tokens), path_(std::move(path)) {
    if (toks_.empty() || !toks_.back().is(TokenKind::End))
      throw ParseError("token stream does not end with End marker",
                       toks_.empty() ? Span{} : toks_.back().span);
  }

  Unit unit() {
    Unit u;
    u.file = toks_.front().span.file;
    u.path = path_;
    unit_ = &u;
    while (!peek().is(TokenKind::End))
      top_level();
    return u;
  }

private:
  //===--------------------------------------------------------------===//
  // Token helpers
  //===--------------------------------------------------------------===//

  const Token &peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token &next() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  bool accept(TokenKind k) {
    if (peek().is(k)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_kw(std::string_view kw) {
    if (peek().is_keyword(kw)) {
      next();
      return true;
    }
    return false;
  }
  const Token &expect(TokenKind k, const char *what) {
    if (!peek().is(k))
      fail(std::string("expected ") + what);
    return next();
  }
  [[noreturn]] void fail(const std::string &msg) const {
    const Token &t = peek();
    std::string found = t.is(TokenKind::End) ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, t.span);
  }
  Span prev_span() const { return toks_[pos_ == 0 ? 0 : pos_ - 1].span; }
  Span from(Span start) const { return Span::cover(start, prev_span()); }

  //===--------------------------------------------------------------===//
  // Types
  //===--------------------------------------------------------------===//

  static bool is_builtin(const Token &t) {
    static const std::set<std::string_view> kBuiltins = {
        "int", "char", "void", "long", "short", "unsigned", "signed"};
    return t.kind == TokenKind::Keyword && kBuiltins.count(t.text);
  }

  bool type_start(std::size_t ahead = 0) const {
    const Token &t = peek(ahead);
    if (is_builtin(t) || t.is_keyword("struct") || t.is_keyword("const") ||
        t.is_keyword("static") || t.is_keyword("extern"))
      return true;
    return t.is(TokenKind::Ident) && typedefs_.count(t.text);
  }

  struct Storage {
    bool is_static = false;
    bool is_extern = false;
  };

  TypeRef base_type(Storage *storage = nullptr) {
    while (true) {
      if (accept_kw("const"))
        continue;
      if (peek().is_keyword("static") || peek().is_keyword("extern")) {
        bool st = next().text == "static";
        if (!storage)
          fail("storage class not allowed here");
        (st ? storage->is_static : storage->is_extern) = true;
        continue;
      }
      break;
    }
    TypeRef t;
    if (is_builtin(peek())) {
      std::string name;
      while (is_builtin(peek())) {
        if (!name.empty())
          name += ' ';
        name += next().text;
        accept_kw("const");
      }
      t.name = name;
    } else if (accept_kw("struct")) {
      const Token &tag = expect(TokenKind::Ident, "struct tag");
      t.name = "struct " + tag.text;
      t.record = tag.text;
      if (peek().is(TokenKind::LBrace))
        record_body(tag.text, tag.span);
    } else if (peek().is(TokenKind::Ident) && typedefs_.count(peek().text)) {
      const Token &name = next();
      const TypeRef &under = typedefs_.at(name.text);
      t.name = name.text;
      t.record = under.record;
      t.depth = under.depth;
    } else {
      fail("expected type");
    }
    while (accept_kw("const")) {
    }
    return t;
  }

  /// Pointer stars belonging to one declarator.
  TypeRef with_stars(TypeRef base) {
    while (accept(TokenKind::Star)) {
      ++base.stars;
      ++base.depth;
      while (accept_kw("const")) {
      }
    }
    return base;
  }

  void record_body(const std::string &tag, Span start) {
    expect(TokenKind::LBrace, "'{'");
    RecordDecl rec;
    rec.tag = tag;
    std::set<std::string> seen;
    while (!accept(TokenKind::RBrace)) {
      TypeRef base = base_type();
      do {
        TypeRef ft = with_stars(base);
        const Token &name = expect(TokenKind::Ident, "field name");
        if (!seen.insert(name.text).second)
          throw ParseError("duplicate field '" + name.text + "'", name.span);
        rec.fields.push_back(Field{ft, name.text});
      } while (accept(TokenKind::Comma));
      expect(TokenKind::Semi, "';' after field");
    }
    rec.span = from(start);
    for (const RecordDecl &r : unit_->records)
      if (r.tag == tag)
        throw ParseError("redefinition of struct " + tag, rec.span);
    unit_->order.emplace_back(TopKind::Record, unit_->records.size());
    unit_->records.push_back(std::move(rec));
  }

  //===--------------------------------------------------------------===//
  // Top level
  //===--------------------------------------------------------------===//

  void top_level() {
    Span start = peek().span;
    if (accept_kw("typedef")) {
      TypeRef t = with_stars(base_type());
      const Token &name = expect(TokenKind::Ident, "typedef name");
      expect(TokenKind::Semi, "';'");
      typedefs_[name.text] = t;
      unit_->order.emplace_back(TopKind::Typedef, unit_->typedefs.size());
      unit_->typedefs.push_back(TypedefDecl{t, name.text, from(start)});
      return;
    }
    Storage storage;
    TypeRef base = base_type(&storage);
    if (accept(TokenKind::Semi))
      return; // bare `struct X {...};`
    TypeRef first = with_stars(base);
    const Token &name = expect(TokenKind::Ident, "declarator name");
    if (peek().is(TokenKind::LParen)) {
      function(first, name, storage, start);
      return;
    }
    global(first, name, storage, start);
    while (accept(TokenKind::Comma)) {
      TypeRef t = with_stars(base);
      const Token &n = expect(TokenKind::Ident, "declarator name");
      global(t, n, storage, n.span);
    }
    expect(TokenKind::Semi, "';' after global declaration");
  }

  void global(TypeRef type, const Token &name, Storage storage, Span start) {
    GlobalVar g;
    g.type = std::move(type);
    g.name = name.text;
    g.is_extern = storage.is_extern;
    g.is_static = storage.is_static;
    if (accept(TokenKind::Assign))
      g.init = assignment();
    g.span = from(start);
    unit_->order.emplace_back(TopKind::Global, unit_->globals.size());
    unit_->globals.push_back(std::move(g));
  }

  void function(TypeRef ret, const Token &name, Storage storage, Span start) {
    auto fn = std::make_unique<Function>();
    fn->name = name.text;
    fn->ret = std::move(ret);
    fn->is_static = storage.is_static;
    fn->file = unit_->file;
    expect(TokenKind::LParen, "'('");
    bool void_list = peek().is_keyword("void") &&
                     peek(1).is(TokenKind::RParen);
    if (void_list)
      next();
    if (!peek().is(TokenKind::RParen)) {
      do {
        Span ps = peek().span;
        TypeRef pt = with_stars(base_type());
        std::string pname;
        if (peek().is(TokenKind::Ident))
          pname = next().text;
        else
          pname = "arg" + std::to_string(fn->params.size());
        for (const Param &p : fn->params)
          if (p.name == pname)
            throw ParseError("duplicate parameter '" + pname + "'", ps);
        fn->params.push_back(Param{pt, pname, from(ps)});
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RParen, "')'");
    if (accept(TokenKind::Semi)) {
      fn->span = from(start);
      add_function(std::move(fn));
      return;
    }
    fn_ = fn.get();
    scopes_.clear();
    labels_.clear();
    gotos_.clear();
    fn->body = block();
    fn->span = from(start);
    for (const auto &[label, span] : gotos_)
      if (!labels_.count(label))
        throw ParseError("goto target '" + label + "' is not defined in " +
                             fn->name,
                         span);
    fn_ = nullptr;
    add_function(std::move(fn));
  }

  void add_function(std::unique_ptr<Function> fn) {
    unit_->order.emplace_back(TopKind::Function, unit_->functions.size());
    unit_->functions.push_back(std::move(fn));
  }

  //===--------------------------------------------------------------===//
  // Statements
  //===--------------------------------------------------------------===//

  StmtPtr make(StmtKind k, Span span) {
    auto s = std::make_unique<Stmt>();
    s->kind = k;
    s->span = span;
    return s;
  }

  StmtPtr block() {
    Span start = expect(TokenKind::LBrace, "'{'").span;
    auto b = make(StmtKind::Block, start);
    scopes_.emplace_back();
    while (!peek().is(TokenKind::RBrace)) {
      if (peek().is(TokenKind::End))
        fail("expected '}'");
      block_item(b->body);
    }
    next();
    scopes_.pop_back();
    b->span = from(start);
    return b;
  }

  void block_item(std::vector<StmtPtr> &out) {
    if (type_start() && !(peek().is(TokenKind::Ident) &&
                          peek(1).is(TokenKind::Colon))) {
      declaration(out);
      return;
    }
    Span start = peek().span;
    if (peek().is(TokenKind::Ident) && peek(1).is(TokenKind::Colon)) {
      const Token &name = next();
      next();
      if (!labels_.insert(name.text).second)
        throw ParseError("duplicate label '" + name.text + "'", name.span);
      auto s = make(StmtKind::Label, from(start));
      s->name = name.text;
      out.push_back(std::move(s));
      return;
    }
    if (accept_kw("case")) {
      if (switch_depth_ == 0)
        throw ParseError("'case' outside switch", start);
      auto s = make(StmtKind::Case, start);
      s->expr = conditional();
      expect(TokenKind::Colon, "':' after case value");
      s->span = from(start);
      out.push_back(std::move(s));
      return;
    }
    if (accept_kw("default")) {
      if (switch_depth_ == 0)
        throw ParseError("'default' outside switch", start);
      expect(TokenKind::Colon, "':' after default");
      out.push_back(make(StmtKind::Default, from(start)));
      return;
    }
    out.push_back(statement());
  }

  void declaration(std::vector<StmtPtr> &out, bool single = false) {
    Span start = peek().span;
    TypeRef base = base_type();
    do {
      TypeRef t = with_stars(base);
      const Token &name = expect(TokenKind::Ident, "variable name");
      auto d = make(StmtKind::Decl, start);
      d->type = t;
      d->name = name.text;
      if (accept(TokenKind::Assign))
        d->expr = assignment();
      // the initializer cannot see the variable being declared
      if (scopes_.back().count(name.text))
        throw ParseError("redeclaration of '" + name.text + "'", name.span);
      d->slot = static_cast<int>(fn_->locals.size());
      fn_->locals.push_back(LocalVar{name.text, t});
      scopes_.back()[name.text] = d->slot;
      d->span = from(start);
      out.push_back(std::move(d));
      if (single)
        break;
    } while (accept(TokenKind::Comma));
    expect(TokenKind::Semi, "';' after declaration");
  }

  StmtPtr sub_statement() {
    if (peek().is(TokenKind::Ident) && peek(1).is(TokenKind::Colon))
      fail("label must appear directly inside a block");
    if (peek().is_keyword("case") || peek().is_keyword("default"))
      fail("case label must appear directly inside a block");
    if (type_start())
      fail("declaration not allowed here");
    return statement();
  }

  StmtPtr statement() {
    Span start = peek().span;
    if (peek().is(TokenKind::LBrace))
      return block();
    if (accept(TokenKind::Semi))
      return make(StmtKind::Empty, start);
    if (accept_kw("if")) {
      auto s = make(StmtKind::If, start);
      s->expr = paren_expr();
      s->body.push_back(sub_statement());
      if (accept_kw("else"))
        s->body.push_back(sub_statement());
      s->span = from(start);
      return s;
    }
    if (accept_kw("while")) {
      auto s = make(StmtKind::While, start);
      s->expr = paren_expr();
      ++loop_depth_;
      s->body.push_back(sub_statement());
      --loop_depth_;
      s->span = from(start);
      return s;
    }
    if (accept_kw("for")) {
      auto s = make(StmtKind::For, start);
      expect(TokenKind::LParen, "'('");
      scopes_.emplace_back();
      if (type_start()) {
        std::vector<StmtPtr> tmp;
        declaration(tmp, true);
        s->init = std::move(tmp.front());
      } else if (peek().is(TokenKind::Semi)) {
        s->init = make(StmtKind::Empty, next().span);
      } else {
        auto e = make(StmtKind::ExprStmt, peek().span);
        e->expr = expression();
        expect(TokenKind::Semi, "';'");
        e->span = from(e->span);
        s->init = std::move(e);
      }
      if (!peek().is(TokenKind::Semi))
        s->expr = expression();
      expect(TokenKind::Semi, "';'");
      if (!peek().is(TokenKind::RParen))
        s->step = expression();
      expect(TokenKind::RParen, "')'");
      ++loop_depth_;
      s->body.push_back(sub_statement());
      --loop_depth_;
      scopes_.pop_back();
      s->span = from(start);
      return s;
    }
    if (accept_kw("switch")) {
      auto s = make(StmtKind::Switch, start);
      s->expr = paren_expr();
      if (!peek().is(TokenKind::LBrace))
        fail("expected '{' after switch");
      ++switch_depth_;
      s->body.push_back(block());
      --switch_depth_;
      s->span = from(start);
      return s;
    }
    if (accept_kw("goto")) {
      const Token &label = expect(TokenKind::Ident, "label");
      expect(TokenKind::Semi, "';'");
      auto s = make(StmtKind::Goto, from(start));
      s->name = label.text;
      gotos_.emplace_back(label.text, s->span);
      return s;
    }
    if (accept_kw("return")) {
      auto s = make(StmtKind::Return, start);
      if (!peek().is(TokenKind::Semi))
        s->expr = expression();
      expect(TokenKind::Semi, "';'");
      s->span = from(start);
      return s;
    }
    if (accept_kw("break")) {
      if (loop_depth_ == 0 && switch_depth_ == 0)
        throw ParseError("'break' outside loop or switch", start);
      expect(TokenKind::Semi, "';'");
      return make(StmtKind::Break, from(start));
    }
    if (accept_kw("continue")) {
      if (loop_depth_ == 0)
        throw ParseError("'continue' outside loop", start);
      expect(TokenKind::Semi, "';'");
      return make(StmtKind::Continue, from(start));
    }
    auto s = make(StmtKind::ExprStmt, start);
    s->expr = expression();
    expect(TokenKind::Semi, "';' after expression");
    s->span = from(start);
    return s;
  }

  //===--------------------------------------------------------------===//
  // Expressions
  //===--------------------------------------------------------------===//

  ExprPtr make_expr(ExprKind k, Span span) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->span = span;
    return e;
  }

  ExprPtr paren_expr() {
    expect(TokenKind::LParen, "'('");
    auto e = expression();
    expect(TokenKind::RParen, "')'");
    return e;
  }

  ExprPtr expression() {
    auto e = assignment();
    if (peek().is(TokenKind::Comma))
      fail("comma operator is not supported");
    return e;
  }

  ExprPtr assignment() {
    auto lhs = conditional();
    AssignOp op;
    if (peek().is(TokenKind::Assign))
      op = AssignOp::Set;
    else if (peek().is(TokenKind::PlusAssign))
      op = AssignOp::AddSet;
    else if (peek().is(TokenKind::MinusAssign))
      op = AssignOp::SubSet;
    else
      return lhs;
    next();
    require_lvalue(*lhs);
    auto rhs = assignment();
    auto e = make_expr(ExprKind::Assign, Span::cover(lhs->span, rhs->span));
    e->assign = op;
    e->kids.push_back(std::move(lhs));
    e->kids.push_back(std::move(rhs));
    return e;
  }

  void require_lvalue(const Expr &e) const {
    if (e.kind == ExprKind::Ident || e.kind == ExprKind::Member ||
        e.kind == ExprKind::Deref)
      return;
    throw ParseError("expression is not assignable", e.span);
  }

  ExprPtr conditional() {
    auto e = binary(1);
    if (peek().is(TokenKind::Question))
      fail("conditional operator is not supported");
    return e;
  }

  static int precedence(TokenKind k, BinOp &op) {
    switch (k) {
    case TokenKind::PipePipe: op = BinOp::LogOr; return 1;
    case TokenKind::AmpAmp: op = BinOp::LogAnd; return 2;
    case TokenKind::Pipe: op = BinOp::BitOr; return 3;
    case TokenKind::Caret: op = BinOp::BitXor; return 4;
    case TokenKind::Amp: op = BinOp::BitAnd; return 5;
    case TokenKind::EqEq: op = BinOp::Eq; return 6;
    case TokenKind::NotEq: op = BinOp::Ne; return 6;
    case TokenKind::Less: op = BinOp::Lt; return 7;
    case TokenKind::LessEq: op = BinOp::Le; return 7;
    case TokenKind::Greater: op = BinOp::Gt; return 7;
    case TokenKind::GreaterEq: op = BinOp::Ge; return 7;
    case TokenKind::Shl: op = BinOp::Shl; return 8;
    case TokenKind::Shr: op = BinOp::Shr; return 8;
    case TokenKind::Plus: op = BinOp::Add; return 9;
    case TokenKind::Minus: op = BinOp::Sub; return 9;
    case TokenKind::Star: op = BinOp::Mul; return 10;
    case TokenKind::Slash: op = BinOp::Div; return 10;
    case TokenKind::Percent: op = BinOp::Mod; return 10;
    default: return 0;
    }
  }

  ExprPtr binary(int min_prec) {
    auto lhs = unary();
    while (true) {
      BinOp op{};
      int prec = precedence(peek().kind, op);
      if (prec == 0 || prec < min_prec)
        return lhs;
      next();
      auto rhs = binary(prec + 1);
      auto e = make_expr(ExprKind::Binary, Span::cover(lhs->span, rhs->span));
      e->bin = op;
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      lhs = std::move(e);
    }
  }

  ExprPtr wrap(ExprKind k, Span start, ExprPtr kid) {
    auto e = make_expr(k, Span::cover(start, kid->span));
    e->kids.push_back(std::move(kid));
    return e;
  }

  ExprPtr unary() {
    Span start = peek().span;
    if (accept(TokenKind::Bang)) {
      auto e = wrap(ExprKind::Unary, start, unary());
      e->un = UnOp::Not;
      return e;
    }
    if (accept(TokenKind::Minus)) {
      auto e = wrap(ExprKind::Unary, start, unary());
      e->un = UnOp::Neg;
      return e;
    }
    if (accept(TokenKind::Tilde)) {
      auto e = wrap(ExprKind::Unary, start, unary());
      e->un = UnOp::BitNot;
      return e;
    }
    if (accept(TokenKind::Star))
      return wrap(ExprKind::Deref, start, unary());
    if (accept(TokenKind::Amp)) {
      auto e = wrap(ExprKind::AddrOf, start, unary());
      require_lvalue(e->kid(0));
      return e;
    }
    if (peek().is(TokenKind::PlusPlus) || peek().is(TokenKind::MinusMinus)) {
      bool inc = next().is(TokenKind::PlusPlus);
      auto e = wrap(ExprKind::IncDec, start, unary());
      require_lvalue(e->kid(0));
      e->increment = inc;
      e->prefix = true;
      return e;
    }
    if (accept_kw("sizeof")) {
      if (peek().is(TokenKind::LParen) && type_start(1)) {
        next();
        auto e = make_expr(ExprKind::SizeofType, start);
        e->type = with_stars(base_type());
        expect(TokenKind::RParen, "')'");
        e->span = from(start);
        return e;
      }
      return wrap(ExprKind::SizeofExpr, start, unary());
    }
    if (peek().is(TokenKind::LParen) && type_start(1)) {
      next();
      TypeRef t = with_stars(base_type());
      expect(TokenKind::RParen, "')' after cast type");
      auto e = wrap(ExprKind::Cast, start, unary());
      e->type = std::move(t);
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    auto e = primary();
    while (true) {
      if (peek().is(TokenKind::Dot) || peek().is(TokenKind::Arrow)) {
        bool arrow = next().is(TokenKind::Arrow);
        const Token &field = expect(TokenKind::Ident, "field name");
        auto m = make_expr(ExprKind::Member, Span::cover(e->span, field.span));
        m->arrow = arrow;
        m->name = field.text;
        m->kids.push_back(std::move(e));
        e = std::move(m);
      } else if (peek().is(TokenKind::PlusPlus) ||
                 peek().is(TokenKind::MinusMinus)) {
        bool inc = next().is(TokenKind::PlusPlus);
        require_lvalue(*e);
        auto p = make_expr(ExprKind::IncDec, Span::cover(e->span, prev_span()));
        p->increment = inc;
        p->prefix = false;
        p->kids.push_back(std::move(e));
        e = std::move(p);
      } else if (peek().is(TokenKind::LBracket)) {
        fail("array indexing is not supported");
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const Token &t = peek();
    Span start = t.span;
    switch (t.kind) {
    case TokenKind::IntLit: {
      next();
      auto e = make_expr(ExprKind::IntLit, start);
      e->name = t.text;
      e->value = parse_int(t);
      return e;
    }
    case TokenKind::CharLit: {
      next();
      auto e = make_expr(ExprKind::IntLit, start);
      e->name = t.text;
      e->value = char_value(t.text);
      return e;
    }
    case TokenKind::StringLit: {
      next();
      auto e = make_expr(ExprKind::StringLit, start);
      e->name = t.text;
      return e;
    }
    case TokenKind::Keyword:
      if (t.text == "NULL") {
        next();
        return make_expr(ExprKind::NullLit, start);
      }
      break;
    case TokenKind::Ident: {
      next();
      if (accept(TokenKind::LParen)) {
        auto call = make_expr(ExprKind::Call, start);
        call->name = t.text;
        if (!peek().is(TokenKind::RParen)) {
          do {
            call->kids.push_back(assignment());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RParen, "')' after arguments");
        call->span = from(start);
        return call;
      }
      auto e = make_expr(ExprKind::Ident, start);
      e->name = t.text;
      resolve_local(*e);
      return e;
    }
    case TokenKind::LParen: {
      next();
      auto e = expression();
      expect(TokenKind::RParen, "')'");
      return e;
    }
    default:
      break;
    }
    fail("expected expression");
  }

  void resolve_local(Expr &e) const {
    if (!fn_)
      return;
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(e.name);
      if (found != it->end()) {
        e.ref = RefKind::Local;
        e.index = found->second;
        return;
      }
    }
    for (std::size_t i = 0; i < fn_->params.size(); ++i)
      if (fn_->params[i].name == e.name) {
        e.ref = RefKind::Param;
        e.index = static_cast<int>(i);
        return;
      }
  }

  static std::int64_t parse_int(const Token &t) {
    std::string_view s = t.text;
    while (!s.empty() && (s.back() == 'u' || s.back() == 'U' ||
                          s.back() == 'l' || s.back() == 'L'))
      s.remove_suffix(1);
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ParseError("integer literal out of range", t.span);
    return v;
  }

  static std::int64_t char_value(std::string_view text) {
    // text includes the quotes
    if (text.size() >= 4 && text[1] == '\\') {
      switch (text[2]) {
      case 'n': return '\n';
      case 't': return '\t';
      case '0': return 0;
      default: return text[2];
      }
    }
    return text.size() >= 3 ? text[1] : 0;
  }

  std::span<const Token> toks_;
  std::size_t pos_ = 0;
  std::string path_;
  Unit *unit_ = nullptr;
  Function *fn_ = nullptr;
  std::map<std::string, TypeRef> typedefs_;
  std::vector<std::unordered_map<std::string, int>> scopes_;
  std::set<std::string> labels_;
  std::vector<std::pair<std::string, Span>> gotos_;
  int loop_depth_ = 0;
  int switch_depth_ = 0;
};

} // namespace

Unit parse_unit(std::span<const Token> tokens, std::string path) {
  return Parser(tokens, std::move(path)).unit();
}

Unit parse_source(std::string_view source, FileId file, std::string path) {
  auto tokens = tokenize(source, file);
  return parse_unit(tokens, std::move(path));
}

} // namespace leakscan
