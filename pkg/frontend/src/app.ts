/** DOM wiring for the annotation UI.
 *
 * Keyboard (1-5 to rate, space to play/pause) and mouse go through the
 * exact same submit path, so both produce identical POST bodies.
 */

import { ApiClient } from "./api.js";
import { Session } from "./state.js";

export interface App {
  session: Session | null;
  start(annotator: string): Promise<void>;
  rate(score: number): Promise<void>;
  retry(): Promise<void>;
  refreshAgreement(): Promise<void>;
}

export function createApp(root: HTMLElement, api: ApiClient = new ApiClient()): App {
  root.innerHTML = `
    <div id="login">
      <label>Annotator id <input id="annotator-input" type="text" autocomplete="off"></label>
      <button id="annotator-start">Start</button>
    </div>
    <div id="workspace" hidden>
      <p id="instructions"></p>
      <div id="banner" hidden><span id="banner-text"></span> <button id="retry">Retry</button></div>
      <div id="status" role="status"></div>
      <div class="progress-track"><div id="progress-fill"></div></div>
      <span id="progress-text"></span>
      <div id="clip-panel">
        <h2 id="clip-position"></h2>
        <audio id="player" controls preload="auto"></audio>
        <div id="rating-buttons">
          ${[1, 2, 3, 4, 5]
            .map((s) => `<button class="rate" data-score="${s}">${s}</button>`)
            .join("")}
        </div>
        <p id="current-rating"></p>
        <label id="toggle-scores-label">
          <input type="checkbox" id="toggle-scores"> show machine sub-scores
        </label>
        <p id="subscores" hidden></p>
        <button id="prev">&larr; prev</button>
        <button id="next">next &rarr;</button>
      </div>
      <p id="agreement">agreement: <span id="alpha-value">n/a</span></p>
      <a id="export-link" href="#" hidden>download training export</a>
    </div>
  `;

  const el = <T extends HTMLElement>(id: string): T =>
    root.querySelector<T>(`#${id}`) as T;

  const app: App = {
    session: null,

    async start(annotator: string) {
      const session = new Session(annotator, api);
      await session.load();
      app.session = session;
      el("login").hidden = true;
      el<HTMLElement>("workspace").hidden = false;
      el("instructions").textContent = session.payload?.instructions ?? "";
      render();
      void app.refreshAgreement();
    },

    async rate(score: number) {
      const session = app.session;
      if (!session) return;
      // submit replaces any queued selection for the current clip
      const outcome = await session.submit(score);
      if (!outcome.ok) {
        if (outcome.retryable) {
          showBanner(`submit failed (${outcome.error}); your selection is kept`);
        } else {
          setStatus(`server rejected rating: ${outcome.error}`);
        }
      } else {
        setStatus("");
        hideBanner();
        void app.refreshAgreement();
      }
      render();
    },

    async retry() {
      const session = app.session;
      if (!session) return;
      const outcome = await session.flush();
      if (outcome.ok) {
        hideBanner();
        setStatus("");
        void app.refreshAgreement();
      } else if (!outcome.retryable) {
        hideBanner();
        setStatus(`server rejected rating: ${outcome.error}`);
      }
      render();
    },

    async refreshAgreement() {
      const session = app.session;
      if (!session) return;
      try {
        const payload = await session.api.agreement();
        el("alpha-value").textContent =
          payload.alpha === null ? (payload.reason ?? "n/a") : payload.alpha.toFixed(3);
      } catch {
        /* agreement is advisory; never block rating on it */
      }
    },
  };

  function setStatus(text: string) {
    el("status").textContent = text;
  }

  function showBanner(text: string) {
    el("banner-text").textContent = text;
    el<HTMLElement>("banner").hidden = false;
  }

  function hideBanner() {
    el<HTMLElement>("banner").hidden = true;
  }

  function render() {
    const session = app.session;
    if (!session) return;
    const clip = session.currentClip;
    const position = session.order.length
      ? `Clip ${session.currentIndex + 1} of ${session.order.length}`
      : "No clips";
    el("clip-position").textContent = position;

    const player = el<HTMLAudioElement>("player");
    const src = clip ? session.api.audioUrl(clip) : "";
    if (player.getAttribute("src") !== src) player.setAttribute("src", src);

    const mine = clip ? session.myRating(clip.clip_id) : null;
    el("current-rating").textContent =
      mine === null ? "not rated yet" : `your stored rating: ${mine}`;
    root.querySelectorAll<HTMLButtonElement>("button.rate").forEach((button) => {
      button.classList.toggle("selected", Number(button.dataset.score) === mine);
    });

    const pct = session.progressPercent();
    el("progress-fill").style.width = `${pct}%`;
    el("progress-text").textContent =
      `${session.ratedCount()} / ${session.totalCount()} rated (${pct}%)`;

    const exportLink = el<HTMLAnchorElement>("export-link");
    exportLink.hidden = !session.complete();
    exportLink.href = session.api.exportUrl();

    const subscores = el("subscores");
    if (session.showSubScores && clip?.subscores) {
      subscores.hidden = false;
      subscores.textContent =
        `emotion ${clip.subscores.s_emo.toFixed(1)} / ` +
        `prosody ${clip.subscores.s_pros.toFixed(1)} / ` +
        `spontaneity ${clip.subscores.s_spon.toFixed(1)}`;
    } else {
      subscores.hidden = true;
      subscores.textContent = "";
    }
  }

  el<HTMLButtonElement>("annotator-start").addEventListener("click", () => {
    const value = el<HTMLInputElement>("annotator-input").value.trim();
    if (value) void app.start(value);
  });

  root.querySelectorAll<HTMLButtonElement>("button.rate").forEach((button) => {
    button.addEventListener("click", () => void app.rate(Number(button.dataset.score)));
  });

  el<HTMLButtonElement>("retry").addEventListener("click", () => void app.retry());
  el<HTMLButtonElement>("prev").addEventListener("click", () => {
    app.session?.goto(-1);
    render();
  });
  el<HTMLButtonElement>("next").addEventListener("click", () => {
    app.session?.goto(1);
    render();
  });
  el<HTMLInputElement>("toggle-scores").addEventListener("change", (event) => {
    if (app.session) {
      app.session.showSubScores = (event.target as HTMLInputElement).checked;
      render();
    }
  });

  const keyHandler = (event: KeyboardEvent) => {
    if (!root.isConnected) {
      // app root replaced (e.g. re-mounted): stop listening
      root.ownerDocument.removeEventListener("keydown", keyHandler);
      return;
    }
    if (!app.session || el<HTMLElement>("workspace").hidden) return;
    if (event.target instanceof HTMLInputElement && event.target.type === "text") return;
    if (event.key >= "1" && event.key <= "5") {
      void app.rate(Number(event.key));
    } else if (event.key === " ") {
      event.preventDefault();
      const player = el<HTMLAudioElement>("player");
      if (player.paused) {
        void Promise.resolve(player.play()).catch(() => {});
      } else {
        player.pause();
      }
    }
  };
  root.ownerDocument.addEventListener("keydown", keyHandler);

  return app;
}
